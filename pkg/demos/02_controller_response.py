"""Trajectory controller behaviour: smoothing, rate limiting, clamping.

Feeds synthetic command streams through the controller and prints how the
output approaches a step target, how the velocity limit bounds each tick,
and how position limits clamp.

Run:  python3 demos/02_controller_response.py
"""

import numpy as np

from armteleop import ControllerConfig, JointLimits, controller_step
from armteleop.controller import initial_state
from armteleop.retarget import joint_vector

wide = JointLimits(np.full(7, -10.0), np.full(7, 10.0), np.full(7, 1e6))
cfg = ControllerConfig(control_rate=100.0, smoothing_alpha=0.35, limits=wide)

# --- step response ---------------------------------------------------------
# with no velocity limit the residual decays as (1 - alpha)^k
state = initial_state(cfg)
target = joint_vector([1.0] * 7)
print("tick   output    closed form")
for k in range(1, 13):
    state, command = controller_step(state, target, k / 100.0, cfg)
    closed = 1.0 - 0.65 ** k
    print(f"{k:4d}   {command.theta[0]:.6f}  {closed:.6f}")

# --- velocity limiting -----------------------------------------------------
slow = JointLimits(np.full(7, -10.0), np.full(7, 10.0), np.full(7, 1.0))
cfg = ControllerConfig(control_rate=100.0, smoothing_alpha=1.0, limits=slow)
state = initial_state(cfg)
state, command = controller_step(state, joint_vector([2.0] * 7), 0.1, cfg)
print("\nvelocity limit 1 rad/s, dt 0.1 s, request 2 rad ->", command.theta[0], "rad")

# --- position clamping -----------------------------------------------------
narrow = JointLimits(np.full(7, -0.5), np.full(7, 0.5), np.full(7, 1e6))
cfg = ControllerConfig(smoothing_alpha=1.0, limits=narrow)
state = initial_state(cfg)
state, command = controller_step(state, joint_vector([3.0] * 7), 0.5, cfg)
print("position limit 0.5 rad, request 3 rad ->", command.theta[0],
      [f.value for f in command.flags][0])
