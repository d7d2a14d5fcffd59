"""Deterministic teleoperation session core.

One session owns the full pipeline state: the freshest buffered skeleton
frame (last writer wins between ticks), the trajectory controller state,
the active task, and the display condition. ``handle`` processes one
client message; ``advance_to`` runs every control tick due up to a given
time. Both return the server messages they emit, in order, as plain dicts;
transports (TCP/WebSocket) and the replay tool serialize them with
``dumps``. Feeding an identical timestamped message log through a fresh
session reproduces the output log byte for byte.

Message schema (one JSON object per line):

  in:  {"type":"frame","seq":N,"data":{...22 frame fields...}}
       {"type":"start_task","kind":"ring"|"posture","spec":{...overrides}}
       {"type":"reset"} | {"type":"set_condition","value":"HH"}
       {"type":"subscribe","topics":["joint_state",...]}
  out: {"type":"joint_state","t":s,"theta":[7],"flags":[7]}
       {"type":"poses","t":s,"elbow":[3],"wrist":[3],"ee":[3]}
       {"type":"task_event","t":s,"event":"goal_achieved","goal":k}
       {"type":"task_state","t":s,"condition":c,"task":{...}|null}
       {"type":"ack","seq":N} | {"type":"error","code":c,"detail":d}
"""

from __future__ import annotations

import json

import numpy as np

from .capture import ParseError, record_to_frame
from .config import ToolkitConfig, ring_spec_from_dict
from .controller import controller_step, initial_state
from .kinematics import forward_kinematics
from .retarget import DegenerateSegment, calibrate_joints, retarget_frame
from .tasks import Observation, start_posture_task, start_ring_task, task_advance

CONDITIONS = ("HH", "HV", "RH", "none")
TOPICS = ("joint_state", "poses", "task_event", "task_state")
DIRECT_TYPES = ("ack", "error")


def dumps(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"))


def _floats(x) -> list:
    return [float(v) for v in np.asarray(x, dtype=float).ravel()]


class Session:
    """Single-writer pipeline session; all methods are synchronous."""

    def __init__(self, config: ToolkitConfig, start_time: float = 0.0):
        self.config = config
        self.start_time = float(start_time)
        self.tick_period = 1.0 / config.controller.control_rate
        self.ticks_run = 0
        self.ack_count = 0
        self.condition = "none"
        self.latest_frame = None
        self.task = None
        self.degenerate_burst = False
        self.frames_received = 0
        self.frames_consumed = 0
        start = config.posture.start_posture
        self.controller_state = initial_state(config.controller, start, t=start_time)

    # ------------------------------------------------------------ messages

    def handle(self, msg: dict, now: float) -> list[dict]:
        """Process one client message at time ``now``."""
        if not isinstance(msg, dict) or "type" not in msg:
            return [self._error("bad_message", "message must be an object with a 'type'")]
        kind = msg["type"]
        if kind == "frame":
            return self._handle_frame(msg)
        if kind == "start_task":
            return self._handle_start_task(msg, now)
        if kind == "reset":
            return self._handle_reset(now)
        if kind == "set_condition":
            return self._handle_condition(msg, now)
        if kind == "subscribe":
            return self._handle_subscribe(msg)
        return [self._error("bad_message", f"unknown message type {kind!r}")]

    def _handle_frame(self, msg: dict) -> list[dict]:
        data = msg.get("data")
        if not isinstance(data, dict):
            return [self._error("bad_message", "frame message needs a 'data' object")]
        try:
            frame = record_to_frame(data)
        except ParseError as exc:
            return [self._error("bad_message", str(exc))]
        self.latest_frame = frame
        self.frames_received += 1
        return [self._ack(msg)]

    def _handle_start_task(self, msg: dict, now: float) -> list[dict]:
        if self.task is not None and self.task.status == "running":
            return [self._error("bad_state", "a task is already running; reset first")]
        kind = msg.get("kind")
        overrides = msg.get("spec") or {}
        try:
            if kind == "ring":
                spec = ring_spec_from_dict(overrides, self.config.ring)
                self.task, events = start_ring_task(spec, now)
            elif kind == "posture":
                self.task, events = start_posture_task(
                    self.config.posture, self.config.chain, now
                )
            else:
                return [self._error("bad_message", f"unknown task kind {kind!r}")]
        except (TypeError, ValueError) as exc:
            return [self._error("bad_message", f"bad task spec: {exc}")]
        out = [self._ack(msg), self._task_state(now)]
        out.extend(self._task_event(e) for e in events)
        return out

    def _handle_reset(self, now: float) -> list[dict]:
        self.task = None
        self.latest_frame = None
        self.degenerate_burst = False
        self.controller_state = initial_state(
            self.config.controller, self.config.posture.start_posture, t=now
        )
        return [self._ack({"type": "reset"}), self._task_state(now)]

    def _handle_condition(self, msg: dict, now: float) -> list[dict]:
        value = msg.get("value")
        if value not in CONDITIONS:
            return [self._error("bad_message", f"condition must be one of {CONDITIONS}")]
        self.condition = value
        return [self._ack(msg), self._task_state(now)]

    def _handle_subscribe(self, msg: dict) -> list[dict]:
        topics = msg.get("topics")
        if not isinstance(topics, list) or any(t not in TOPICS for t in topics):
            return [self._error("bad_message", f"topics must be a list from {TOPICS}")]
        return [self._ack(msg)]

    # ----------------------------------------------------------------- ticks

    def next_tick_time(self) -> float:
        return self.start_time + self.ticks_run * self.tick_period

    def advance_to(self, now: float) -> list[dict]:
        """Run every control tick due at or before ``now``."""
        out = []
        while self.next_tick_time() <= now + 1e-12:
            out.extend(self.tick(self.next_tick_time()))
            self.ticks_run += 1
        return out

    def tick(self, now: float) -> list[dict]:
        out = []
        target = self.controller_state.last_command
        if self.latest_frame is not None:
            try:
                raw = retarget_frame(self.latest_frame, self.config.retarget)
                target = calibrate_joints(raw, self.config.retarget, self.config.limits)
                self.frames_consumed += 1
                self.degenerate_burst = False
            except DegenerateSegment as exc:
                if not self.degenerate_burst:
                    out.append(self._error("degenerate_frame", str(exc)))
                    self.degenerate_burst = True
        self.controller_state, command = controller_step(
            self.controller_state, target, now, self.config.controller
        )
        poses = forward_kinematics(self.config.chain, command)
        chain = self.config.chain
        elbow = poses[chain.elbow_link].position
        wrist = poses[chain.wrist_link].position
        ee = poses[chain.ee_link].position
        out.append(
            {
                "type": "joint_state",
                "t": now,
                "theta": _floats(command.theta),
                "flags": [f.value for f in command.flags],
            }
        )
        out.append(
            {
                "type": "poses",
                "t": now,
                "elbow": _floats(elbow),
                "wrist": _floats(wrist),
                "ee": _floats(ee),
            }
        )
        if self.task is not None and self.task.status == "running":
            obs = Observation(ee=ee, elbow=elbow, wrist=wrist)
            for event in task_advance(self.task, obs, now):
                out.append(self._task_event(event))
            if self.task.status == "done":
                out.append(self._task_state(now))
        return out

    # ------------------------------------------------------------- encoding

    def _ack(self, msg: dict) -> dict:
        self.ack_count += 1
        seq = msg.get("seq")
        return {"type": "ack", "seq": int(seq) if seq is not None else self.ack_count}

    @staticmethod
    def _error(code: str, detail: str) -> dict:
        return {"type": "error", "code": code, "detail": detail}

    def _task_event(self, event) -> dict:
        out = {"type": "task_event", "t": event.t, "event": event.event, "goal": event.goal}
        if event.payload:
            out["payload"] = event.payload
        return out

    def _task_state(self, now: float) -> dict:
        return {
            "type": "task_state",
            "t": now,
            "condition": self.condition,
            "task": None if self.task is None else self.task.snapshot(),
        }


def run_message_log(config: ToolkitConfig, entries, trailing: float = 0.0) -> list[dict]:
    """Feed (t, msg) pairs through a fresh session; returns all output msgs.

    Ticks due before each message run first, mirroring how a live transport
    interleaves them. ``trailing`` extends the tick run past the last
    message.
    """
    entries = list(entries)
    session = Session(config, start_time=entries[0][0] if entries else 0.0)
    out = []
    for t, msg in entries:
        out.extend(session.advance_to(t))
        out.extend(session.handle(msg, t))
    if entries and trailing > 0.0:
        out.extend(session.advance_to(entries[-1][0] + trailing))
    return out


__all__ = ["CONDITIONS", "DIRECT_TYPES", "Session", "TOPICS", "dumps", "run_message_log"]
