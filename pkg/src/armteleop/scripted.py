"""Synthetic operator that completes tasks by generating skeleton frames.

For each task goal the operator searches the seven human arm parameters for
a pose whose retargeted, calibrated robot state satisfies the goal
predicate (derivative-free multi-start coordinate descent; the calibrated
pipeline is piecewise because of clamps, so no analytic inverse exists for
position goals). It then interpolates from the current parameters to the
goal with minimum-jerk timing at the capture rate and holds the goal pose
long enough for the trajectory controller to settle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capture import minimum_jerk
from .kinematics import (
    HumanArmModel,
    JointLimits,
    KinematicChain,
    forward_kinematics,
    human_arm_fk,
    robot_elbow_wrist,
)
from .retarget import JointVector, RetargetConfig, calibrate_joints, retarget_frame
from .tasks import PostureTaskSpec, RingTaskSpec, ring_sequence, ring_target_positions

# interior box for the seven human parameters (elevation, azimuth,
# upper twist, elbow opening, forearm twist, hand flexion, hand roll)
PARAM_LOWER = np.array([-math.pi / 2 + 0.1, -math.pi + 0.1, -math.pi + 0.1, 0.1,
                        -math.pi + 0.1, -math.pi + 0.1, -math.pi + 0.1])
PARAM_UPPER = np.array([math.pi / 2 - 0.1, math.pi - 0.1, math.pi - 0.1, math.pi - 0.1,
                        math.pi - 0.1, math.pi - 0.1, math.pi - 0.1])


class Unreachable(RuntimeError):
    def __init__(self, goal_index: int, detail: str = ""):
        self.goal_index = goal_index
        super().__init__(f"goal {goal_index} unreachable{': ' + detail if detail else ''}")


@dataclass(frozen=True)
class OperatorSettings:
    capture_rate: float = 60.0
    move_duration: float = 1.2
    settle_duration: float = 0.8
    max_evals: int = 5000
    seed: int = 0


@dataclass(frozen=True)
class Pipeline:
    """Human model plus everything needed to map params to robot poses."""

    human: HumanArmModel
    chain: KinematicChain
    retarget: RetargetConfig
    limits: JointLimits

    def command(self, params) -> JointVector:
        raw = retarget_frame(human_arm_fk(self.human, params), self.retarget)
        return calibrate_joints(raw, self.retarget, self.limits)

    def ee(self, params) -> np.ndarray:
        return forward_kinematics(self.chain, self.command(params))[-1].position

    def elbow_wrist(self, params) -> tuple[np.ndarray, np.ndarray]:
        return robot_elbow_wrist(self.chain, self.command(params))

    def params_for(self, command: JointVector) -> np.ndarray:
        """Interior human parameters whose calibrated image is ``command``.

        Exact when the command is inside the limit box; otherwise the
        nearest interior point (gains are +-1 so they invert themselves).
        """
        cfg = self.retarget
        params = cfg.gains * (command.theta - cfg.offsets)
        return np.clip(params, PARAM_LOWER, PARAM_UPPER)


def _coordinate_descent(objective, start, success, budget, rng):
    """Greedy per-coordinate line search; returns (best, cost, evals, ok)."""
    best = np.clip(np.asarray(start, dtype=float), PARAM_LOWER, PARAM_UPPER)
    cost = objective(best)
    evals = 1
    if success(best):
        return best, cost, evals, True
    step = 0.4
    while evals < budget and step > 1e-4:
        improved = False
        for i in range(len(best)):
            for delta in (step, -step):
                if evals >= budget:
                    break
                cand = best.copy()
                cand[i] = float(np.clip(cand[i] + delta, PARAM_LOWER[i], PARAM_UPPER[i]))
                if cand[i] == best[i]:
                    continue
                c = objective(cand)
                evals += 1
                if c < cost:
                    best, cost = cand, c
                    improved = True
                    if success(best):
                        return best, cost, evals, True
                    break
        if not improved:
            step *= 0.5
    return best, cost, evals, success(best)


def solve_goal(objective, success, warm_start, rng, max_evals=5000, restarts=6, hint=None):
    """Multi-start coordinate descent over the human parameter box.

    ``hint`` is an extra first start (e.g. the analytic inverse of a
    joint-space goal); remaining starts perturb the warm start and sample
    the box uniformly.
    """
    warm_start = np.asarray(warm_start, dtype=float)
    starts = [] if hint is None else [np.asarray(hint, dtype=float)]
    starts.append(warm_start)
    for k in range(restarts):
        if k < restarts // 2:
            starts.append(warm_start + rng.normal(scale=0.4, size=7))
        else:
            starts.append(rng.uniform(PARAM_LOWER, PARAM_UPPER))
    spent = 0
    best_params, best_cost = None, math.inf
    for start in starts:
        remaining = max_evals - spent
        if remaining <= 0:
            break
        params, cost, used, ok = _coordinate_descent(
            objective, start, success, remaining, rng
        )
        spent += used
        if ok:
            return params
        if cost < best_cost:
            best_params, best_cost = params, cost
    return None


def _goal_solvers(task, pipeline: Pipeline):
    """(index, objective, success, hint) tuples in presentation order."""
    if isinstance(task, RingTaskSpec):
        order = ring_sequence(task.count)
        positions = ring_target_positions(task)
        out = []
        for idx in order:
            target = positions[idx]

            def objective(p, target=target):
                return float(np.linalg.norm(pipeline.ee(p) - target))

            def success(p, target=target):
                d = pipeline.ee(p) - target
                perp = abs(float(d @ task.normal))
                lat = float(np.linalg.norm(d - (d @ task.normal) * task.normal))
                return perp <= 0.6 * task.perpendicular_tolerance and lat <= 0.6 * (
                    task.target_diameter / 2.0
                )

            out.append((idx, objective, success, None))
        return out

    if isinstance(task, PostureTaskSpec):
        out = []
        for idx, goal in enumerate(task.postures):
            goal_elbow, goal_wrist = robot_elbow_wrist(pipeline.chain, goal)

            def objective(p, ge=goal_elbow, gw=goal_wrist):
                elbow, wrist = pipeline.elbow_wrist(p)
                return max(
                    float(np.linalg.norm(elbow - ge)), float(np.linalg.norm(wrist - gw))
                )

            def success(p, ge=goal_elbow, gw=goal_wrist):
                return objective(p, ge, gw) <= 0.6 * task.tolerance

            # joint-space goals invert through the calibration table
            out.append((idx, objective, success, pipeline.params_for(goal)))
        return out

    raise TypeError(f"unsupported task spec {type(task).__name__}")


def scripted_operator(
    task,
    pipeline: Pipeline,
    settings: OperatorSettings = OperatorSettings(),
    start_command: JointVector | None = None,
):
    """Frame stream that drives the full pipeline through every task goal.

    Deterministic for a fixed settings.seed. Raises Unreachable when the
    goal search cannot satisfy a goal predicate within its budget.
    """
    rng = np.random.default_rng(settings.seed)
    if start_command is None and isinstance(task, PostureTaskSpec):
        start_command = task.start_posture
    if start_command is not None:
        current = pipeline.params_for(start_command)
    else:
        current = pipeline.params_for(JointVector(np.zeros(7)))

    rate = settings.capture_rate
    n_move = max(2, round(settings.move_duration * rate))
    n_settle = max(1, round(settings.settle_duration * rate))

    frames = []
    tick = 0

    def emit(params):
        nonlocal tick
        frames.append(human_arm_fk(pipeline.human, params, timestamp=tick / rate))
        tick += 1

    emit(current)
    for goal_index, objective, success, hint in _goal_solvers(task, pipeline):
        goal_params = solve_goal(
            objective, success, current, rng, max_evals=settings.max_evals, hint=hint
        )
        if goal_params is None:
            raise Unreachable(goal_index, f"no parameters found within {settings.max_evals} evals")
        for i in range(1, n_move + 1):
            s = minimum_jerk(i / n_move)
            emit(current + s * (goal_params - current))
        for _ in range(n_settle):
            emit(goal_params)
        current = goal_params
    return frames


__all__ = [
    "OperatorSettings",
    "PARAM_LOWER",
    "PARAM_UPPER",
    "Pipeline",
    "Unreachable",
    "scripted_operator",
    "solve_goal",
]
