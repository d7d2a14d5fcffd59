"""Quaternion and small-vector helpers shared across the toolkit.

Quaternions are length-4 float64 arrays in [w, x, y, z] order and compose
right to left: ``qmul(a, b)`` applies ``b`` first, like column-vector
rotation matrices. Positions and directions are length-3 float64 arrays in
the toolkit's y-up world convention (the capture side labels its frames
left-handed; all math here operates on raw components, so only the sign
conventions of the calibration table depend on that label).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([float(x), float(y), float(z)])


def norm(v) -> float:
    return float(np.linalg.norm(v))


def unit(v, eps: float = 1e-12) -> np.ndarray:
    """Normalize a vector, rejecting near-zero input."""
    v = np.asarray(v, dtype=float)
    n = norm(v)
    if n <= eps:
        raise ValueError(f"cannot normalize near-zero vector (norm={n:g})")
    return v / n


def qnormalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = norm(q)
    if n <= 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def qcanonical(q) -> np.ndarray:
    """Fix the sign ambiguity: first nonzero component (w first) positive."""
    q = np.asarray(q, dtype=float)
    for c in q:
        if c > 0.0:
            return q
        if c < 0.0:
            return -q
    return q


def qmul(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def qconj(q) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def qrotate(q, v) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w = q[0]
    u = np.asarray(q[1:4], dtype=float)
    v = np.asarray(v, dtype=float)
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def from_axis_angle(axis, angle: float) -> np.ndarray:
    a = unit(axis)
    half = 0.5 * float(angle)
    s = math.sin(half)
    return np.array([math.cos(half), s * a[0], s * a[1], s * a[2]])


def shortest_arc(a, b) -> np.ndarray:
    """Minimal rotation taking unit vector a onto unit vector b.

    The rotation axis is perpendicular to both inputs, which is what makes
    twist extraction about either vector exact. For anti-parallel inputs any
    perpendicular axis works; a deterministic one is chosen.
    """
    a = unit(a)
    b = unit(b)
    w = 1.0 + float(a @ b)
    if w <= 1e-12:
        # 180 degrees: pick the coordinate axis least aligned with a.
        pivot = Y_AXIS if abs(a[0]) > abs(a[1]) else X_AXIS
        axis = unit(np.cross(a, pivot))
        return np.array([0.0, axis[0], axis[1], axis[2]])
    v = np.cross(a, b)
    return qnormalize(np.array([w, v[0], v[1], v[2]]))


def slerp(a, b, t: float) -> np.ndarray:
    """Shortest-arc spherical interpolation with sign canonicalization."""
    a = qnormalize(a)
    b = qnormalize(b)
    dot = float(a @ b)
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-12:
        return qnormalize(a + t * (b - a))
    theta = math.acos(min(dot, 1.0))
    s = math.sin(theta)
    return (math.sin((1.0 - t) * theta) / s) * a + (math.sin(t * theta) / s) * b


def qdist(a, b) -> float:
    """Distance between rotations, insensitive to quaternion sign."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return min(norm(a - b), norm(a + b))


class SwingTwist(NamedTuple):
    swing: np.ndarray
    angle: float
    indeterminate: bool


def swing_twist(q, axis, tol: float = 1e-12) -> SwingTwist:
    """Factor q = swing ∘ twist with the twist purely about ``axis``.

    The twist angle lies in (-pi, pi]; the swing carries no component along
    the axis. When the rotation is a half turn about an axis perpendicular
    to ``axis`` the twist is undefined: the angle is reported as 0 with the
    indeterminate flag set and the swing equal to the whole rotation.
    """
    a = unit(axis)
    q = qcanonical(qnormalize(q))
    p = float(q[1:4] @ a)
    mag = math.hypot(q[0], p)
    if mag < tol:
        return SwingTwist(q.copy(), 0.0, True)
    twist = np.array([q[0], p * a[0], p * a[1], p * a[2]]) / mag
    angle = 2.0 * math.atan2(p, q[0])
    if angle <= -math.pi:
        angle += 2.0 * math.pi
    swing = qmul(q, qconj(twist))
    return SwingTwist(qcanonical(swing), angle, False)


def twist_angle(q, axis, tol: float = 1e-12) -> tuple[float, bool]:
    """Just the twist component of swing_twist (angle, indeterminate)."""
    st = swing_twist(q, axis, tol=tol)
    return st.angle, st.indeterminate
