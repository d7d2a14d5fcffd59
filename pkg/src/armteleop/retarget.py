"""Mapping from a tracked human right arm to seven robot joint angles.

One skeleton frame (three joint positions plus three segment orientations)
maps to the raw joint vector as follows:

* theta1: elevation of the upper arm above the horizontal plane,
  ``atan2(y, sqrt(x^2 + z^2))`` of the upper-arm vector.
* theta2: azimuth of the upper arm in the horizontal plane,
  ``atan2(z, x)``; indeterminate when the arm points along the vertical.
* theta4: elbow opening, ``acos(-(u . f) / (|u||f|))``, pi when straight.
* theta3 / theta5: axial twist of the upper-arm / forearm orientation
  relative to its configured neutral, measured about the segment direction.
* theta6 / theta7: hand flexion and hand roll, from the hand orientation
  relative to the forearm.

All functions are pure; the caller owns hold-last-value policies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .quat import qconj, qmul, swing_twist, unit

EPSILON = 1e-9


class JointFlag(str, enum.Enum):
    OK = "Ok"
    CLAMPED = "Clamped"
    INDETERMINATE = "Indeterminate"


OK7 = (JointFlag.OK,) * 7


class DegenerateSegment(ValueError):
    """A tracked segment has (near) zero length."""


@dataclass(frozen=True)
class SkeletonFrame:
    """One timestamped capture of the operator's right arm."""

    timestamp: float
    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    q_upper: np.ndarray
    q_fore: np.ndarray
    q_hand: np.ndarray


@dataclass(frozen=True)
class SegmentVectors:
    upper_arm: np.ndarray
    forearm: np.ndarray


@dataclass(frozen=True)
class JointVector:
    """Seven joint angles with per-joint status flags."""

    theta: np.ndarray
    flags: tuple[JointFlag, ...] = OK7

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.theta.shape != (7,):
            raise ValueError(f"expected 7 joint angles, got shape {self.theta.shape}")
        if len(self.flags) != 7:
            raise ValueError("expected 7 joint flags")

    def with_theta(self, theta, flags=None) -> "JointVector":
        return JointVector(np.asarray(theta, dtype=float), tuple(flags or self.flags))


def joint_vector(values) -> JointVector:
    return JointVector(np.asarray(values, dtype=float))


@dataclass(frozen=True)
class RetargetConfig:
    """Reference orientations and per-joint calibration for the mapping.

    Neutral orientations define the zero-twist pose (identity corresponds to
    a straight arm along +x with no segment roll). Gains are +-1 sign flips
    and offsets are added after the gain; both exist because the human and
    robot zero conventions differ per joint.
    """

    neutral_q_upper: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    neutral_q_fore: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    neutral_q_hand: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    hand_flexion_axis: np.ndarray = field(default_factory=lambda: quat.Z_AXIS.copy())
    gains: np.ndarray = field(default_factory=lambda: np.ones(7))
    offsets: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 0.0, -math.pi, 0.0, 0.0, 0.0])
    )
    epsilon: float = EPSILON

    def __post_init__(self):
        if not np.all(np.abs(self.gains) == 1.0):
            raise ValueError("calibration gains must be exactly +1 or -1")
        if abs(quat.norm(self.hand_flexion_axis) - 1.0) > 1e-9:
            raise ValueError("hand_flexion_axis must be unit length")


def identity_calibration() -> RetargetConfig:
    """Config with gain +1 / offset 0 everywhere (raw passthrough)."""
    return RetargetConfig(offsets=np.zeros(7))


def segment_vectors(frame: SkeletonFrame, eps: float = EPSILON) -> SegmentVectors:
    """Upper-arm and forearm vectors; raises on degenerate segments."""
    upper = np.asarray(frame.elbow, dtype=float) - np.asarray(frame.shoulder, dtype=float)
    fore = np.asarray(frame.wrist, dtype=float) - np.asarray(frame.elbow, dtype=float)
    if quat.norm(upper) <= eps:
        raise DegenerateSegment("shoulder-elbow segment has near-zero length")
    if quat.norm(fore) <= eps:
        raise DegenerateSegment("elbow-wrist segment has near-zero length")
    return SegmentVectors(upper, fore)


def joint_theta2(seg: SegmentVectors, eps: float = EPSILON) -> tuple[float, JointFlag]:
    """Horizontal azimuth of the upper arm; 0 + flag when the arm is vertical."""
    x, _, z = seg.upper_arm
    if math.hypot(x, z) < eps:
        return 0.0, JointFlag.INDETERMINATE
    return math.atan2(z, x), JointFlag.OK


def joint_theta1(seg: SegmentVectors) -> float:
    """Elevation of the upper arm above the horizontal plane."""
    x, y, z = seg.upper_arm
    return math.atan2(y, math.hypot(x, z))


def joint_theta4(seg: SegmentVectors, eps: float = EPSILON) -> float:
    """Elbow opening angle in [0, pi]; pi for a straight arm."""
    nu = quat.norm(seg.upper_arm)
    nf = quat.norm(seg.forearm)
    if nu <= eps or nf <= eps:
        raise DegenerateSegment("zero-length segment in elbow angle")
    # dot/norm ratios can land a hair outside [-1, 1]
    c = float(np.clip(-float(seg.upper_arm @ seg.forearm) / (nu * nf), -1.0, 1.0))
    return math.acos(c)


def twist_joints(
    frame: SkeletonFrame, seg: SegmentVectors, cfg: RetargetConfig
) -> tuple[float, JointFlag, float, JointFlag]:
    """Axial twists of the upper arm (theta3) and forearm (theta5)."""
    rel_u = qmul(qconj(cfg.neutral_q_upper), frame.q_upper)
    rel_f = qmul(qconj(cfg.neutral_q_fore), frame.q_fore)
    t3, ind3 = quat.twist_angle(rel_u, unit(seg.upper_arm))
    t5, ind5 = quat.twist_angle(rel_f, unit(seg.forearm))
    f3 = JointFlag.INDETERMINATE if ind3 else JointFlag.OK
    f5 = JointFlag.INDETERMINATE if ind5 else JointFlag.OK
    return t3, f3, t5, f5


def wrist_joints(
    frame: SkeletonFrame, seg: SegmentVectors, cfg: RetargetConfig
) -> tuple[float, JointFlag, float, JointFlag]:
    """Hand flexion (theta6) and hand roll (theta7) from relative orientation.

    The hand orientation relative to its reference on the forearm factors as
    flexion-about-axis composed with roll; the flexion twist is removed on
    the approach side, and the roll is the remaining twist about the hand's
    longitudinal axis (the forearm direction seen from the reference hand
    frame).
    """
    ref = qmul(frame.q_fore, cfg.neutral_q_hand)
    rel = qmul(qconj(ref), frame.q_hand)
    t6, ind6 = quat.twist_angle(rel, cfg.hand_flexion_axis)
    residual = qmul(qconj(quat.from_axis_angle(cfg.hand_flexion_axis, t6)), rel)
    longitudinal = quat.qrotate(qconj(ref), unit(seg.forearm))
    t7, ind7 = quat.twist_angle(residual, unit(longitudinal))
    f6 = JointFlag.INDETERMINATE if ind6 else JointFlag.OK
    f7 = JointFlag.INDETERMINATE if ind7 else JointFlag.OK
    return t6, f6, t7, f7


def retarget_frame(frame: SkeletonFrame, cfg: RetargetConfig) -> JointVector:
    """Raw (uncalibrated) joint vector for one skeleton frame.

    Pure function of its inputs; raises DegenerateSegment when either arm
    segment collapses, leaving hold-last-value policy to the caller.
    """
    seg = segment_vectors(frame, cfg.epsilon)
    t1 = joint_theta1(seg)
    t2, f2 = joint_theta2(seg, cfg.epsilon)
    t4 = joint_theta4(seg, cfg.epsilon)
    t3, f3, t5, f5 = twist_joints(frame, seg, cfg)
    t6, f6, t7, f7 = wrist_joints(frame, seg, cfg)
    theta = np.array([t1, t2, t3, t4, t5, t6, t7])
    flags = (JointFlag.OK, f2, f3, JointFlag.OK, f5, f6, f7)
    return JointVector(theta, flags)


def calibrate_joints(raw: JointVector, cfg: RetargetConfig, limits) -> JointVector:
    """Apply per-joint gain/offset, then clamp to the robot limits."""
    adjusted = cfg.gains * raw.theta + cfg.offsets
    clipped = np.clip(adjusted, limits.lower, limits.upper)
    flags = tuple(
        JointFlag.CLAMPED if clipped[i] != adjusted[i] else raw.flags[i]
        for i in range(7)
    )
    return JointVector(clipped, flags)


__all__ = [
    "DegenerateSegment",
    "EPSILON",
    "JointFlag",
    "JointVector",
    "RetargetConfig",
    "SegmentVectors",
    "SkeletonFrame",
    "calibrate_joints",
    "identity_calibration",
    "joint_theta1",
    "joint_theta2",
    "joint_theta4",
    "joint_vector",
    "retarget_frame",
    "segment_vectors",
    "twist_joints",
    "wrist_joints",
]
