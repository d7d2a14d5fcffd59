"""Target-reaching and posture-matching task machinery plus trial metrics.

Two benchmark tasks drive the evaluation loop:

* ring reaching: a ring of circular targets on a plane in front of the
  robot, visited in a multidirectional hop order; a target is selected when
  the end effector is within the perpendicular tolerance of the target
  plane and inside the target disc.
* posture matching: a list of goal joint postures; one is matched when the
  robot's elbow and wrist are both within tolerance of the goal positions.

The task state is single-owner: only ``task_advance`` mutates it. Snapshots
for broadcasting are plain dicts.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import KinematicChain, robot_elbow_wrist
from .quat import Z_AXIS, unit
from .retarget import JointVector

log = logging.getLogger(__name__)

GOAL_SHOWN = "goal_shown"
GOAL_ACHIEVED = "goal_achieved"
CLAMP = "clamp"


class IncompleteTrial(ValueError):
    """The trial log has no complete shown/achieved pair for every goal."""


@dataclass(frozen=True)
class RingTaskSpec:
    center: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.56, 0.9]))
    radius: float = 0.225
    target_diameter: float = 0.05
    count: int = 11
    perpendicular_tolerance: float = 0.10
    normal: np.ndarray = field(default_factory=lambda: Z_AXIS.copy())
    require_in_plane: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "normal", unit(self.normal))
        if not self.radius > self.target_diameter / 2.0 > 0.0:
            raise ValueError("need radius > target_diameter/2 > 0")
        if self.count < 2:
            raise ValueError("need at least 2 targets")
        if self.perpendicular_tolerance <= 0.0:
            raise ValueError("perpendicular_tolerance must be positive")


@dataclass(frozen=True)
class PostureTaskSpec:
    postures: tuple[JointVector, ...]
    start_posture: JointVector
    tolerance: float = 0.05
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "postures", tuple(self.postures))
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.labels and len(self.labels) != len(self.postures):
            raise ValueError("one label per posture")


def ring_target_positions(spec: RingTaskSpec) -> list[np.ndarray]:
    """Target centres, index 0 at the top of the ring, counter-clockwise."""
    # in-plane basis: u along world x, v along world y for the default +z normal
    n = spec.normal
    seed = Z_AXIS if abs(n[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = unit(np.cross(seed, n))
    v = np.cross(n, u)
    positions = []
    for i in range(spec.count):
        alpha = math.pi / 2.0 + 2.0 * math.pi * i / spec.count
        positions.append(spec.center + spec.radius * (math.cos(alpha) * u + math.sin(alpha) * v))
    return positions


def ring_sequence(count: int) -> list[int]:
    """Multidirectional hop order visiting every target exactly once."""
    if count < 2:
        raise ValueError("need at least 2 targets")
    stride = (count + 1) // 2
    if math.gcd(stride, count) != 1:
        # even counts: ceil(n/2) shares a factor with n; move to the nearest
        # coprime stride, preferring the larger hop on ties
        for delta in range(1, count):
            for cand in (stride + delta, stride - delta):
                if 1 <= cand < count and math.gcd(cand, count) == 1:
                    log.warning(
                        "stride %d not coprime with %d targets; using %d",
                        stride, count, cand,
                    )
                    stride = cand
                    break
            else:
                continue
            break
    return [(k * stride) % count for k in range(count)]


def selection_test(ee, target, spec: RingTaskSpec) -> bool:
    """Whether an end-effector position selects the given target."""
    d = np.asarray(ee, dtype=float) - np.asarray(target, dtype=float)
    perp = abs(float(d @ spec.normal))
    if perp > spec.perpendicular_tolerance:
        return False
    if spec.require_in_plane:
        in_plane = d - (d @ spec.normal) * spec.normal
        if float(np.linalg.norm(in_plane)) > spec.target_diameter / 2.0:
            return False
    return True


def posture_match_test(elbow, wrist, goal_elbow, goal_wrist, tol: float) -> bool:
    """Both markers within tolerance of their goals (closed boundary)."""
    de = float(np.linalg.norm(np.asarray(elbow, dtype=float) - goal_elbow))
    dw = float(np.linalg.norm(np.asarray(wrist, dtype=float) - goal_wrist))
    return de <= tol and dw <= tol


@dataclass(frozen=True)
class TaskEvent:
    t: float
    event: str
    goal: int
    payload: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"t": self.t, "event": self.event, "goal_index": self.goal, "payload": self.payload}

    @classmethod
    def from_record(cls, rec: dict) -> "TaskEvent":
        goal = rec["goal_index"] if "goal_index" in rec else rec["goal"]
        return cls(
            t=float(rec["t"]),
            event=str(rec["event"]),
            goal=int(goal),
            payload=dict(rec.get("payload", {})),
        )


@dataclass(frozen=True)
class Observation:
    """Robot pose facts a task predicate can look at."""

    ee: np.ndarray | None = None
    elbow: np.ndarray | None = None
    wrist: np.ndarray | None = None


@dataclass
class TaskState:
    kind: str  # "ring" | "posture"
    goal_ids: list[int]
    status: str = "idle"  # idle | running | done
    active: int = 0
    shown_at: list = field(default_factory=list)
    achieved_at: list = field(default_factory=list)
    # predicate data, filled by the constructors below
    ring_spec: RingTaskSpec | None = None
    targets: list = field(default_factory=list)
    posture_spec: PostureTaskSpec | None = None
    goal_points: list = field(default_factory=list)

    def snapshot(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status,
            "active": self.active if self.status == "running" else None,
            "goals": list(self.goal_ids),
            "shown_at": list(self.shown_at),
            "achieved_at": list(self.achieved_at),
        }


def start_ring_task(spec: RingTaskSpec, now: float) -> tuple[TaskState, list[TaskEvent]]:
    order = ring_sequence(spec.count)
    positions = ring_target_positions(spec)
    state = TaskState(
        kind="ring",
        goal_ids=order,
        status="running",
        ring_spec=spec,
        targets=[positions[i] for i in order],
        shown_at=[None] * spec.count,
        achieved_at=[None] * spec.count,
    )
    return state, [_show_active(state, now)]


def start_posture_task(
    spec: PostureTaskSpec, chain: KinematicChain, now: float
) -> tuple[TaskState, list[TaskEvent]]:
    n = len(spec.postures)
    state = TaskState(
        kind="posture",
        goal_ids=list(range(n)),
        status="running",
        posture_spec=spec,
        goal_points=[robot_elbow_wrist(chain, p) for p in spec.postures],
        shown_at=[None] * n,
        achieved_at=[None] * n,
    )
    return state, [_show_active(state, now)]


def _show_active(state: TaskState, now: float) -> TaskEvent:
    state.shown_at[state.active] = now
    goal = state.goal_ids[state.active]
    if state.kind == "ring":
        payload = {"target": [float(c) for c in state.targets[state.active]]}
    else:
        elbow, wrist = state.goal_points[state.active]
        payload = {
            "elbow": [float(c) for c in elbow],
            "wrist": [float(c) for c in wrist],
        }
        spec = state.posture_spec
        if spec and spec.labels:
            payload["label"] = spec.labels[goal]
    return TaskEvent(now, GOAL_SHOWN, goal, payload)


def _active_goal_met(state: TaskState, obs: Observation) -> bool:
    if state.kind == "ring":
        if obs.ee is None:
            return False
        return selection_test(obs.ee, state.targets[state.active], state.ring_spec)
    if obs.elbow is None or obs.wrist is None:
        return False
    goal_elbow, goal_wrist = state.goal_points[state.active]
    return posture_match_test(
        obs.elbow, obs.wrist, goal_elbow, goal_wrist, state.posture_spec.tolerance
    )


def task_advance(state: TaskState, obs: Observation, now: float) -> list[TaskEvent]:
    """Advance the goal sequence against one observation; returns new events.

    Mutates the state in place (single-owner contract). Idle and done states
    ignore observations.
    """
    if state.status != "running":
        return []
    if not _active_goal_met(state, obs):
        return []
    state.achieved_at[state.active] = now
    events = [TaskEvent(now, GOAL_ACHIEVED, state.goal_ids[state.active])]
    if state.active + 1 < len(state.goal_ids):
        state.active += 1
        events.append(_show_active(state, now))
    else:
        state.status = "done"
    return events


def latin_square(n: int) -> list[list[int]]:
    """Counterbalancing order matrix; balanced adjacency for even n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    first = [0]
    for k in range(1, n):
        first.append((k + 1) // 2 if k % 2 else n - k // 2)
    return [[(c + i) % n for c in first] for i in range(n)]


@dataclass(frozen=True)
class MetricsSummary:
    movement_times: tuple[float, ...]
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {
            "movement_times": list(self.movement_times),
            "mean": self.mean,
            "std": self.std,
            "count": len(self.movement_times),
        }


@dataclass
class TrialLog:
    events: list[TaskEvent] = field(default_factory=list)

    def append(self, event: TaskEvent):
        self.events.append(event)

    def extend(self, events):
        self.events.extend(events)

    def goal_events(self) -> list[TaskEvent]:
        return [e for e in self.events if e.event in (GOAL_SHOWN, GOAL_ACHIEVED)]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_record()) + "\n" for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> "TrialLog":
        events = []
        for line in text.splitlines():
            line = line.strip()
            if line:
                events.append(TaskEvent.from_record(json.loads(line)))
        return cls(events)


def summarize(trial: TrialLog) -> MetricsSummary:
    """Per-goal movement times (achieved - shown) with mean and sample std."""
    shown: dict[int, float] = {}
    times: list[float] = []
    last_t = -math.inf
    for e in trial.events:
        if e.t < last_t:
            raise ValueError("trial log events must be time-ordered")
        last_t = e.t
        if e.event == GOAL_SHOWN:
            shown[e.goal] = e.t
        elif e.event == GOAL_ACHIEVED:
            if e.goal not in shown:
                raise IncompleteTrial(f"goal {e.goal} achieved without being shown")
            times.append(e.t - shown.pop(e.goal))
    if shown:
        raise IncompleteTrial(f"goals never achieved: {sorted(shown)}")
    if not times:
        raise IncompleteTrial("log contains no completed goals")
    arr = np.asarray(times)
    std = float(np.std(arr, ddof=1)) if len(times) > 1 else 0.0
    return MetricsSummary(tuple(times), float(np.mean(arr)), std)


__all__ = [
    "CLAMP",
    "GOAL_ACHIEVED",
    "GOAL_SHOWN",
    "IncompleteTrial",
    "MetricsSummary",
    "Observation",
    "PostureTaskSpec",
    "RingTaskSpec",
    "TaskEvent",
    "TaskState",
    "TrialLog",
    "latin_square",
    "posture_match_test",
    "ring_sequence",
    "ring_target_positions",
    "selection_test",
    "start_posture_task",
    "start_ring_task",
    "summarize",
    "task_advance",
]
