"""Retargeting basics: from tracked arm positions to robot joint angles.

Walks through the closed-form part of the mapping on hand-built frames,
then uses the synthetic human arm to show that the full seven-angle
extraction inverts exactly.

Run:  python3 demos/01_retargeting_basics.py
"""

import math

import numpy as np

from armteleop import (
    HumanArmModel,
    RetargetConfig,
    SkeletonFrame,
    calibrate_joints,
    default_limits,
    human_arm_fk,
    retarget_frame,
)
from armteleop.quat import IDENTITY

cfg = RetargetConfig()
deg = 180.0 / math.pi

# --- a straight arm pointing along +x ------------------------------------
# shoulder at the origin, elbow 30 cm out, wrist another 27 cm
frame = SkeletonFrame(
    timestamp=0.0,
    shoulder=np.zeros(3),
    elbow=np.array([0.30, 0.0, 0.0]),
    wrist=np.array([0.57, 0.0, 0.0]),
    q_upper=IDENTITY, q_fore=IDENTITY, q_hand=IDENTITY,
)
raw = retarget_frame(frame, cfg)
print("straight arm, raw angles [deg]:", np.round(raw.theta * deg, 3))
print("  (elevation and azimuth zero, elbow angle 180 = fully open)")

# --- raise the arm 45 degrees ---------------------------------------------
lift = SkeletonFrame(
    timestamp=0.0,
    shoulder=np.zeros(3),
    elbow=np.array([0.30 * math.cos(0.25 * math.pi), 0.30 * math.sin(0.25 * math.pi), 0.0]),
    wrist=np.array([0.57 * math.cos(0.25 * math.pi), 0.57 * math.sin(0.25 * math.pi), 0.0]),
    q_upper=IDENTITY, q_fore=IDENTITY, q_hand=IDENTITY,
)
print("raised 45 deg, theta1 [deg]:", round(retarget_frame(lift, cfg).theta[0] * deg, 3))

# --- the full seven angles via the synthetic arm ---------------------------
# human_arm_fk builds a skeleton frame for chosen parameters; retargeting
# recovers them, which is how the toolkit validates itself end to end
model = HumanArmModel()
params = np.array([0.3, 0.9, 0.4, 2.1, -0.5, 0.35, 0.2])
recovered = retarget_frame(human_arm_fk(model, params), cfg)
print("\nchosen  parameters:", np.round(params, 6))
print("recovered raw angles:", np.round(recovered.theta, 6))
print("max error [rad]:", float(np.max(np.abs(recovered.theta - params))))

# --- calibration to the robot's conventions -------------------------------
# gains flip signs, offsets move zeros, and the joint-limit table clamps;
# a straight human arm lands at the robot's elbow limit on joint 4
command = calibrate_joints(raw, cfg, default_limits())
print("\ncalibrated command:", np.round(command.theta, 3))
print("flags:", [f.value for f in command.flags])
