"""Forward kinematics for the simulated 7-DOF arm and a parametric human arm.

The robot chain is a serial list of joint descriptors, each a fixed
pre-transform (translation + rotation in the parent frame) followed by a
revolute rotation about a local axis, plus a fixed tool transform after the
last joint. ``forward_kinematics`` returns one pose per joint frame and a
final end-effector pose.

The human arm model runs the mapping in the opposite direction: given the
seven human parameters (elevation, azimuth, upper-arm twist, elbow opening,
forearm twist, hand flexion, hand roll) it synthesizes a skeleton frame
whose retargeting recovers exactly those parameters. Segment orientations
are built as shortest-arc swing times axial twist, which is what makes the
twist extraction exact rather than approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .quat import X_AXIS, Z_AXIS, from_axis_angle, qmul, qrotate, shortest_arc, unit
from .retarget import JointFlag, JointVector, SkeletonFrame


class DimensionMismatch(ValueError):
    """Joint vector length does not match the chain."""


@dataclass(frozen=True)
class JointLimits:
    lower: np.ndarray
    upper: np.ndarray
    max_velocity: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        vel = np.asarray(self.max_velocity, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "max_velocity", vel)
        if not (lower.shape == upper.shape == vel.shape):
            raise ValueError("limit arrays must share a shape")
        if np.any(lower >= upper):
            raise ValueError("each lower limit must be below its upper limit")
        if np.any(vel <= 0.0):
            raise ValueError("velocity limits must be positive")


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    orientation: np.ndarray


@dataclass(frozen=True)
class JointDescriptor:
    """Fixed parent-frame transform followed by rotation about ``axis``."""

    axis: np.ndarray
    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        if abs(quat.norm(self.axis) - 1.0) > 1e-9:
            raise ValueError("joint axis must be unit length")


@dataclass(frozen=True)
class KinematicChain:
    joints: tuple[JointDescriptor, ...]
    base_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    base_orientation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    tool_translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tool_rotation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    elbow_link: int = 3
    wrist_link: int = 5
    ee_link: int = 7

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        if not self.joints:
            raise ValueError("chain needs at least one joint")
        n_frames = len(self.joints) + 1  # joint frames plus the tool frame
        for name in ("elbow_link", "wrist_link", "ee_link"):
            idx = getattr(self, name)
            if not 0 <= idx < n_frames:
                raise ValueError(f"{name}={idx} outside 0..{n_frames - 1}")
        if not (self.elbow_link <= self.wrist_link <= self.ee_link):
            raise ValueError("expected elbow_link <= wrist_link <= ee_link")

    @property
    def n_joints(self) -> int:
        return len(self.joints)


def forward_kinematics(chain: KinematicChain, joints) -> list[Pose]:
    """Poses of every joint frame plus the end effector.

    ``pose[k]`` is the frame after joint k's rotation; the last entry is the
    tool frame. Accepts a JointVector or a plain angle sequence.
    """
    theta = joints.theta if isinstance(joints, JointVector) else np.asarray(joints, dtype=float)
    if theta.shape != (chain.n_joints,):
        raise DimensionMismatch(
            f"chain has {chain.n_joints} joints, got {theta.shape} angles"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("joint angles must be finite")

    poses = []
    pos = np.asarray(chain.base_position, dtype=float)
    rot = np.asarray(chain.base_orientation, dtype=float)
    for desc, angle in zip(chain.joints, theta):
        pos = pos + qrotate(rot, desc.translation)
        rot = qmul(rot, desc.rotation)
        rot = quat.qnormalize(qmul(rot, from_axis_angle(desc.axis, angle)))
        poses.append(Pose(pos, rot))
    pos = pos + qrotate(rot, chain.tool_translation)
    rot = quat.qnormalize(qmul(rot, chain.tool_rotation))
    poses.append(Pose(pos, rot))
    return poses


def robot_elbow_wrist(chain: KinematicChain, joints) -> tuple[np.ndarray, np.ndarray]:
    """Positions of the chain's designated elbow and wrist frames."""
    poses = forward_kinematics(chain, joints)
    return poses[chain.elbow_link].position, poses[chain.wrist_link].position


def clamp_to_limits(joints: JointVector, limits: JointLimits) -> JointVector:
    clipped = np.clip(joints.theta, limits.lower, limits.upper)
    flags = tuple(
        JointFlag.CLAMPED if clipped[i] != joints.theta[i] else joints.flags[i]
        for i in range(7)
    )
    return JointVector(clipped, flags)


# FR3-class geometry, modified-DH rows (alpha_prev, a_prev, d). The default
# scale enlarges every translation so the shipped reaching task (ring centre
# 1.06 m from the base) lies well inside the dexterous workspace; pass
# scale=1.0 for the catalog-size arm.
_DH_ROWS = (
    (0.0, 0.0, 0.333),
    (-math.pi / 2, 0.0, 0.0),
    (math.pi / 2, 0.0, 0.316),
    (math.pi / 2, 0.0825, 0.0),
    (-math.pi / 2, -0.0825, 0.384),
    (math.pi / 2, 0.0, 0.0),
    (math.pi / 2, 0.088, 0.0),
)
_DH_TOOL_D = 0.107

DEFAULT_CHAIN_SCALE = 1.4

# Rotation taking the chain's native z-up frame into the world's y-up frame
# (robot x -> world z, so the arm faces the +z "front").
_BASE_TO_WORLD = np.array([0.5, -0.5, -0.5, -0.5])


def fr3_chain(scale: float = DEFAULT_CHAIN_SCALE) -> KinematicChain:
    """Serial chain with FR3-style joint layout, elbow at joint 4, wrist at 6."""
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    joints = []
    for alpha, a, d in _DH_ROWS:
        rot = from_axis_angle(X_AXIS, alpha) if alpha else quat.IDENTITY.copy()
        translation = qrotate(rot, np.array([a * scale, 0.0, d * scale]))
        joints.append(JointDescriptor(axis=Z_AXIS.copy(), translation=translation, rotation=rot))
    return KinematicChain(
        joints=tuple(joints),
        base_orientation=_BASE_TO_WORLD.copy(),
        tool_translation=np.array([0.0, 0.0, _DH_TOOL_D * scale]),
        elbow_link=3,
        wrist_link=5,
        ee_link=7,
    )


def default_limits() -> JointLimits:
    """Joint-position and velocity limit table for the FR3-class arm."""
    return JointLimits(
        lower=np.array([-2.74, -1.78, -2.90, -3.07, -2.81, -0.02, -2.90]),
        upper=np.array([2.74, 1.78, 2.90, -0.07, 2.81, 3.75, 2.90]),
        max_velocity=np.array([2.62, 2.62, 2.62, 2.62, 5.26, 4.18, 5.26]),
    )


@dataclass(frozen=True)
class HumanArmModel:
    """Segment lengths and shoulder placement for the synthetic operator."""

    shoulder_origin: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.4, 0.0]))
    upper_length: float = 0.30
    fore_length: float = 0.27
    hand_length: float = 0.08

    def __post_init__(self):
        object.__setattr__(
            self, "shoulder_origin", np.asarray(self.shoulder_origin, dtype=float)
        )
        if min(self.upper_length, self.fore_length, self.hand_length) <= 0.0:
            raise ValueError("segment lengths must be positive")


HUMAN_PARAM_NAMES = (
    "elevation",
    "azimuth",
    "upper_twist",
    "elbow",
    "fore_twist",
    "hand_flexion",
    "hand_roll",
)


def human_arm_fk(
    model: HumanArmModel,
    params,
    timestamp: float = 0.0,
    flexion_axis=None,
) -> SkeletonFrame:
    """Skeleton frame realizing the given human joint parameters.

    The upper-arm direction is (cos e cos a, sin e, cos e sin a) for
    elevation e and azimuth a; the elbow opening is the angle parameter
    directly (pi = straight). Segment orientations compose a shortest-arc
    aim with an axial twist so the retargeting extraction is exact, and the
    forearm folds about the twisted upper arm's local z like a hinge.
    """
    e, a, tw_u, elbow_open, tw_f, flex, roll = (float(p) for p in params)
    if flexion_axis is None:
        flexion_axis = Z_AXIS
    ce = math.cos(e)
    u_dir = np.array([ce * math.cos(a), math.sin(e), ce * math.sin(a)])

    q_upper = qmul(shortest_arc(X_AXIS, u_dir), from_axis_angle(X_AXIS, tw_u))
    # hinge: forearm folds toward local +y as the elbow closes
    fold = math.pi - elbow_open
    f_local = np.array([math.cos(fold), math.sin(fold), 0.0])
    f_dir = unit(qrotate(q_upper, f_local))
    q_fore = qmul(shortest_arc(X_AXIS, f_dir), from_axis_angle(X_AXIS, tw_f))
    q_hand = qmul(
        q_fore,
        qmul(from_axis_angle(flexion_axis, flex), from_axis_angle(X_AXIS, roll)),
    )

    shoulder = np.asarray(model.shoulder_origin, dtype=float)
    elbow = shoulder + model.upper_length * u_dir
    wrist = elbow + model.fore_length * f_dir
    return SkeletonFrame(
        timestamp=float(timestamp),
        shoulder=shoulder,
        elbow=elbow,
        wrist=wrist,
        q_upper=q_upper,
        q_fore=q_fore,
        q_hand=q_hand,
    )


__all__ = [
    "DEFAULT_CHAIN_SCALE",
    "DimensionMismatch",
    "HUMAN_PARAM_NAMES",
    "HumanArmModel",
    "JointDescriptor",
    "JointLimits",
    "KinematicChain",
    "Pose",
    "clamp_to_limits",
    "default_limits",
    "forward_kinematics",
    "fr3_chain",
    "human_arm_fk",
    "robot_elbow_wrist",
]
