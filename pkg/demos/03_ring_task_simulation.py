"""Headless end-to-end run of the ring-reaching task.

The scripted operator synthesizes a capture stream that steers the
simulated robot through all eleven targets; the session runs the full
retarget -> calibrate -> controller -> forward-kinematics -> task loop and
this script reports what happened. Equivalent to:

    armteleop simulate --task ring --seed 1

Run:  python3 demos/03_ring_task_simulation.py
"""

import numpy as np

from armteleop import default_config, ring_sequence, ring_target_positions, summarize
from armteleop.capture import frame_to_record
from armteleop.scripted import OperatorSettings, Pipeline, scripted_operator
from armteleop.service import run_message_log
from armteleop.tasks import TaskEvent, TrialLog

cfg = default_config()

print("target ring: centre", cfg.ring.center, "radius", cfg.ring.radius)
print("hop order:", ring_sequence(cfg.ring.count))
for i, p in enumerate(ring_target_positions(cfg.ring)):
    print(f"  target {i:2d} at {np.round(p, 3)}")

# --- synthesize the operator stream ---------------------------------------
pipeline = Pipeline(cfg.human, cfg.chain, cfg.retarget, cfg.limits)
frames = scripted_operator(cfg.ring, pipeline, OperatorSettings(seed=1))
print(f"\nscripted operator: {len(frames)} frames over {frames[-1].timestamp:.1f} s")

# --- drive a session in virtual time ---------------------------------------
entries = [(0.0, {"type": "start_task", "kind": "ring"})]
entries += [
    (f.timestamp, {"type": "frame", "seq": i + 1, "data": frame_to_record(f)})
    for i, f in enumerate(frames)
]
outputs = run_message_log(cfg, entries, trailing=0.5)

events = [m for m in outputs if m["type"] == "task_event"]
print(f"session emitted {len(outputs)} messages, {len(events)} task events")
for e in events:
    print(f"  t={e['t']:7.2f}  {e['event']:<13}  goal {e['goal']}")

trial = TrialLog([TaskEvent(e["t"], e["event"], e["goal"]) for e in events])
summary = summarize(trial)
print("\nmovement times [s]:", [round(t, 2) for t in summary.movement_times])
print(f"mean {summary.mean:.3f} s, sd {summary.std:.3f} s")
