"""Rate-limited joint trajectory smoothing between capture rate and control rate.

Raw retargeted commands arrive at whatever rate the capture source produces;
the controller turns them into a fixed-rate stream that always respects the
robot's position and velocity limits. Each tick applies exponential
smoothing toward the latest target, clips the per-tick change to the
velocity limit, and clamps to the position limits. Indeterminate target
joints can be held at their last commanded value so singular capture poses
never cause command jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .kinematics import JointLimits, clamp_to_limits, default_limits
from .retarget import JointFlag, JointVector


class NonMonotonicTime(ValueError):
    """Controller stepped backwards in time."""


@dataclass(frozen=True)
class ControllerConfig:
    control_rate: float = 100.0
    smoothing_alpha: float = 0.35
    limits: JointLimits = field(default_factory=default_limits)
    hold_on_indeterminate: bool = True

    def __post_init__(self):
        if self.control_rate <= 0.0:
            raise ValueError("control_rate must be positive")
        if not 0.0 < self.smoothing_alpha <= 1.0:
            raise ValueError("smoothing_alpha must be in (0, 1]")


@dataclass(frozen=True)
class ControllerState:
    last_command: JointVector
    last_time: float


def initial_state(cfg: ControllerConfig, start: JointVector | None = None, t: float = 0.0) -> ControllerState:
    """State seeded with a limit-respecting start command."""
    if start is None:
        start = JointVector(np.zeros(7))
    return ControllerState(clamp_to_limits(start, cfg.limits), float(t))


def controller_step(
    state: ControllerState,
    target: JointVector,
    now: float,
    cfg: ControllerConfig,
) -> tuple[ControllerState, JointVector]:
    """One control tick toward ``target``; returns (new state, command)."""
    if now < state.last_time:
        raise NonMonotonicTime(f"step at {now} before state time {state.last_time}")
    dt = now - state.last_time
    if dt == 0.0:
        dt = 1.0 / cfg.control_rate

    last = state.last_command.theta
    goal = np.array(target.theta, dtype=float)
    if cfg.hold_on_indeterminate:
        for i, flag in enumerate(target.flags):
            if flag is JointFlag.INDETERMINATE:
                goal[i] = last[i]

    smoothed = last + cfg.smoothing_alpha * (goal - last)
    max_step = cfg.limits.max_velocity * dt
    stepped = last + np.clip(smoothed - last, -max_step, max_step)
    command = clamp_to_limits(JointVector(stepped), cfg.limits)
    return ControllerState(command, float(now)), command


def resample_commands(
    stream: Iterable[tuple[float, JointVector]],
    cfg: ControllerConfig,
    start: JointVector | None = None,
) -> Iterator[tuple[float, JointVector]]:
    """Resample a timestamped command stream onto the fixed control grid.

    Ticks run at exactly 1/control_rate from the first input timestamp to the
    last (floor(span * rate) + 1 ticks); each tick steps the controller
    against the most recent input at or before it. Empty input yields empty
    output.
    """
    items = list(stream)
    if not items:
        return
    times = [t for t, _ in items]
    if any(b < a for a, b in zip(times, times[1:])):
        raise NonMonotonicTime("input timestamps must be non-decreasing")

    t0 = times[0]
    n_ticks = _grid_floor((times[-1] - t0) * cfg.control_rate) + 1
    state = initial_state(cfg, start, t=t0)
    idx = 0
    for k in range(n_ticks):
        tick_t = t0 + k / cfg.control_rate
        while idx + 1 < len(items) and times[idx + 1] <= tick_t:
            idx += 1
        state, command = controller_step(state, items[idx][1], tick_t, cfg)
        yield tick_t, command


def _grid_floor(x: float) -> int:
    # guards against 0.9999999999 artifacts when span*rate is integral
    n = int(x)
    if x - n > 1.0 - 1e-9:
        return n + 1
    return n


__all__ = [
    "ControllerConfig",
    "ControllerState",
    "NonMonotonicTime",
    "controller_step",
    "initial_state",
    "resample_commands",
]
