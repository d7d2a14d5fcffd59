"""Command-line entry points.

Exit codes: 0 ok, 2 input/parse problem, 3 config problem, 4 task/trial
failure, 5 environment problem (e.g. busy port). All file outputs are
written atomically (temp file + rename) and inputs are never modified.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
import time

from .capture import ParseError, frame_to_record, parse_frames, write_frames
from .config import ConfigError, load_config
from .retarget import DegenerateSegment, calibrate_joints, retarget_frame
from .scripted import OperatorSettings, Pipeline, Unreachable, scripted_operator
from .service import dumps, run_message_log
from .tasks import CLAMP, GOAL_SHOWN, IncompleteTrial, TaskEvent, TrialLog, summarize

OK, EXIT_INPUT, EXIT_CONFIG, EXIT_TASK, EXIT_ENV = 0, 2, 3, 4, 5


def _atomic_write(path: str, text: str):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _detect_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "jsonl" if path.endswith((".jsonl", ".ndjson", ".json")) else "csv"


def _read_text(path: str) -> str:
    with open(path) as fh:
        return fh.read()


# ------------------------------------------------------------------ retarget


def cmd_retarget(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = _detect_format(args.input, args.format)
    try:
        frames, _meta = parse_frames(_read_text(args.input), fmt, strict=not args.lenient)
    except FileNotFoundError:
        print(f"input not found: {args.input}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"parse error in {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    rows = ["t,theta1,theta2,theta3,theta4,theta5,theta6,theta7,"
            "flag1,flag2,flag3,flag4,flag5,flag6,flag7"]
    held = None
    skipped = 0
    for frame in frames:
        try:
            raw = retarget_frame(frame, cfg.retarget)
            held = calibrate_joints(raw, cfg.retarget, cfg.limits)
        except DegenerateSegment:
            if held is None:
                skipped += 1
                continue
            # hold-last-value policy for degenerate capture frames
        rows.append(
            ",".join(
                [repr(frame.timestamp)]
                + [repr(float(v)) for v in held.theta]
                + [f.value for f in held.flags]
            )
        )
    _atomic_write(args.output, "\n".join(rows) + "\n")
    msg = f"wrote {len(rows) - 1} rows to {args.output}"
    if skipped:
        msg += f" ({skipped} leading degenerate frames skipped)"
    print(msg)
    return OK


# ------------------------------------------------------------------ simulate


def _simulate_messages(cfg, task_kind: str, seed: int):
    settings = OperatorSettings(
        capture_rate=cfg.operator.capture_rate,
        move_duration=cfg.operator.move_duration,
        settle_duration=cfg.operator.settle_duration,
        max_evals=cfg.operator.max_evals,
        seed=seed,
    )
    pipeline = Pipeline(cfg.human, cfg.chain, cfg.retarget, cfg.limits)
    task = cfg.ring if task_kind == "ring" else cfg.posture
    frames = scripted_operator(task, pipeline, settings)
    entries = [(frames[0].timestamp, {"type": "start_task", "kind": task_kind})]
    for i, frame in enumerate(frames):
        entries.append(
            (frame.timestamp, {"type": "frame", "seq": i + 1, "data": frame_to_record(frame)})
        )
    return entries


def _clamp_events(outputs) -> list[TaskEvent]:
    """Log a clamp record whenever the set of clamped joints changes."""
    events = []
    previous: tuple[int, ...] = ()
    for msg in outputs:
        if msg.get("type") != "joint_state":
            continue
        clamped = tuple(i for i, f in enumerate(msg["flags"]) if f == "Clamped")
        if clamped and clamped != previous:
            events.append(TaskEvent(msg["t"], CLAMP, -1, {"joints": list(clamped)}))
        previous = clamped
    return events


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        entries = _simulate_messages(cfg, args.task, args.seed)
    except Unreachable as exc:
        print(f"scripted operator failed: {exc}", file=sys.stderr)
        return EXIT_TASK

    outputs = run_message_log(cfg, entries, trailing=0.5)

    done = any(
        m.get("type") == "task_state" and m.get("task") and m["task"]["status"] == "done"
        for m in outputs
    )
    goal_events = [
        TaskEvent(m["t"], m["event"], m["goal"], m.get("payload", {}))
        for m in outputs
        if m.get("type") == "task_event"
    ]
    trial = TrialLog(sorted(goal_events + _clamp_events(outputs), key=lambda e: e.t))
    if not done:
        print("task did not complete; trial is unfinished", file=sys.stderr)
        if args.log:
            _atomic_write(args.log, trial.to_jsonl())
        return EXIT_TASK

    summary = summarize(TrialLog(goal_events))
    if args.log:
        _atomic_write(args.log, trial.to_jsonl())
    if args.out:
        _atomic_write(args.out, json.dumps(summary.to_dict(), indent=2) + "\n")
    if args.session:
        lines = []
        for t, msg in entries:
            lines.append(json.dumps({"dir": "in", "t": t, "msg": msg}, separators=(",", ":")))
        for msg in outputs:
            lines.append(json.dumps({"dir": "out", "msg": msg}, separators=(",", ":")))
        _atomic_write(args.session, "\n".join(lines) + "\n")

    print(f"{args.task} task complete: {len(summary.movement_times)} goals")
    print(f"movement time mean {summary.mean:.3f} s, sd {summary.std:.3f} s")
    return OK


# -------------------------------------------------------------------- replay


def _load_session_lines(path: str):
    entries, recorded = [], []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, exc.colno, f"invalid JSON: {exc.msg}")
        if obj.get("dir") == "in":
            entries.append((float(obj["t"]), obj["msg"]))
        elif obj.get("dir") == "out":
            recorded.append(obj["msg"])
        else:
            raise ParseError(lineno, None, "transcript lines need dir 'in' or 'out'")
    return entries, recorded


def cmd_replay(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rate = 0.0
    if args.rate:
        if not args.rate.startswith("x"):
            print("rate must look like x10", file=sys.stderr)
            return EXIT_INPUT
        rate = float(args.rate[1:])

    try:
        if args.input.endswith(".jsonl") and '"dir"' in _read_text(args.input)[:200]:
            entries, recorded = _load_session_lines(args.input)
        else:
            fmt = _detect_format(args.input, args.format)
            frames, _ = parse_frames(_read_text(args.input), fmt)
            entries = [(f.timestamp, {"type": "frame", "seq": i + 1, "data": frame_to_record(f)})
                       for i, f in enumerate(frames)]
            recorded = None
    except FileNotFoundError:
        print(f"input not found: {args.input}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"parse error in {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if rate > 0.0:
        for (t0, _), (t1, _) in zip(entries, entries[1:]):
            time.sleep(max(0.0, (t1 - t0) / rate))

    trailing = 0.5
    if recorded:
        out_ts = [m["t"] for m in recorded if "t" in m]
        in_ts = [t for t, _ in entries]
        if out_ts and in_ts:
            trailing = max(0.0, max(out_ts) - max(in_ts))
    outputs = run_message_log(cfg, entries, trailing=trailing)

    if recorded is None:
        events = sum(1 for m in outputs if m.get("type") == "task_event")
        print(f"replayed {len(entries)} messages, emitted {len(outputs)} ({events} task events)")
        return OK

    got = [dumps(m) for m in outputs]
    want = [dumps(m) for m in recorded]
    if got == want:
        print(f"replay identical: {len(got)} messages")
        return OK
    for i, (g, w) in enumerate(zip(got, want)):
        if g != w:
            print(f"first divergence at message {i}:\n  recorded: {w}\n  replayed: {g}", file=sys.stderr)
            break
    else:
        print(f"length mismatch: recorded {len(want)}, replayed {len(got)}", file=sys.stderr)
    return EXIT_TASK


# ------------------------------------------------------------------- metrics


def cmd_metrics(args) -> int:
    try:
        trial = TrialLog.from_jsonl(_read_text(args.log))
    except FileNotFoundError:
        print(f"log not found: {args.log}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"cannot parse {args.log}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        summary = summarize(trial)
    except IncompleteTrial as exc:
        print(f"incomplete trial: {exc}", file=sys.stderr)
        return EXIT_TASK

    shown_order = [e.goal for e in trial.events if e.event == GOAL_SHOWN]
    print(f"{'goal':>6}  {'movement time [s]':>18}")
    for goal, mt in zip(shown_order, summary.movement_times):
        print(f"{goal:>6}  {mt:>18.3f}")
    print(f"{'mean':>6}  {summary.mean:>18.3f}")
    print(f"{'sd':>6}  {summary.std:>18.3f}")
    if args.json:
        _atomic_write(args.json, json.dumps(summary.to_dict(), indent=2) + "\n")
    return OK


# --------------------------------------------------------------------- serve


def cmd_serve(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    from .server import serve

    try:
        asyncio.run(serve(cfg, port=args.port, ws_port=args.ws_port))
    except OSError as exc:
        print(f"cannot bind server port: {exc}", file=sys.stderr)
        return EXIT_ENV
    except KeyboardInterrupt:
        pass
    return OK


# ------------------------------------------------------------------- extras


def cmd_record(args) -> int:
    """Generate a scripted-operator frame file (useful fixture input)."""
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        entries = _simulate_messages(cfg, args.task, args.seed)
    except Unreachable as exc:
        print(f"scripted operator failed: {exc}", file=sys.stderr)
        return EXIT_TASK
    frames = [msg["data"] for _, msg in entries if msg["type"] == "frame"]
    fmt = _detect_format(args.output, args.format)
    from .capture import record_to_frame

    text = write_frames([record_to_frame(r) for r in frames], fmt)
    _atomic_write(args.output, text)
    print(f"wrote {len(frames)} frames to {args.output}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="armteleop", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("retarget", help="map a frame file to calibrated joint rows")
    r.add_argument("--input", required=True)
    r.add_argument("--format", choices=["csv", "jsonl"])
    r.add_argument("--config")
    r.add_argument("--output", required=True)
    r.add_argument("--lenient", action="store_true", help="drop out-of-order frames")
    r.set_defaults(func=cmd_retarget)

    s = sub.add_parser("simulate", help="run a task headlessly with the scripted operator")
    s.add_argument("--task", choices=["ring", "posture"], required=True)
    s.add_argument("--operator", choices=["scripted"], default="scripted")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config")
    s.add_argument("--out", help="metrics JSON path")
    s.add_argument("--log", help="trial event log path (jsonl)")
    s.add_argument("--session", help="full session transcript path (jsonl)")
    s.set_defaults(func=cmd_simulate)

    rp = sub.add_parser("replay", help="re-drive a session from a transcript or frame file")
    rp.add_argument("--input", required=True)
    rp.add_argument("--format", choices=["csv", "jsonl"])
    rp.add_argument("--config")
    rp.add_argument("--rate", help="pace messages in wall time, e.g. x10")
    rp.set_defaults(func=cmd_replay)

    m = sub.add_parser("metrics", help="summarize a trial log")
    m.add_argument("--log", required=True)
    m.add_argument("--json", help="also write the summary as JSON")
    m.set_defaults(func=cmd_metrics)

    sv = sub.add_parser("serve", help="run the teleoperation service")
    sv.add_argument("--port", type=int)
    sv.add_argument("--ws-port", type=int)
    sv.add_argument("--config")
    sv.set_defaults(func=cmd_serve)

    rec = sub.add_parser("record", help="write a scripted-operator frame file")
    rec.add_argument("--task", choices=["ring", "posture"], required=True)
    rec.add_argument("--seed", type=int, default=0)
    rec.add_argument("--config")
    rec.add_argument("--format", choices=["csv", "jsonl"])
    rec.add_argument("--output", required=True)
    rec.set_defaults(func=cmd_record)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
