"""Outer planning loop: swarm init, sweeps, stopping, metrics, export.

One iteration is one full Gauss-Seidel sweep over all agents. Histories
track the best loss seen so far (non-increasing by construction) plus the
raw end-of-sweep values; the stopping rule watches the raw sequence so a
temporarily stalled best does not end a run early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .consensus import (ConsensusGraph, FdScheme, Hyperparams, init_swarm,
                        sweep)
from .errors import InvalidArgument, NumericFailure
from .liegroup import rot_to_euler
from .optimizers import default_config, make_optimizer
from .trajectory import (BreakpointVector, LossWeights, Objective,
                         SampledTrajectory, Scenario, initial_breakpoints)


@dataclass(frozen=True)
class PlannerConfig:
    n_agents: int = 3
    dt: float = 0.05
    total_time: float = 10.0
    n_intervals: int | None = None  # default: ceil(total_time / dt)
    weights: LossWeights | None = None  # default: from the scenario file
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    scheme: FdScheme = field(default_factory=FdScheme)
    optimizer_kind: str = "rmsprop"
    optimizer_constants: dict | None = None
    max_iterations: int = 100
    tolerance: float = 1e-6
    influence_aware: bool = True
    consensus: bool = True
    anchored_consensus: bool = True
    clamp_speed: float | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be >= 1")
        if not (self.tolerance > 0.0):
            raise InvalidArgument("tolerance must be positive")
        if not (self.dt > 0.0):
            raise InvalidArgument("dt must be positive")
        if self.n_agents < 1:
            raise InvalidArgument("n_agents must be >= 1")

    def resolved_intervals(self) -> int:
        if self.n_intervals is not None:
            return self.n_intervals
        return int(math.ceil(self.total_time / self.dt))


@dataclass
class PlanResult:
    trajectory: SampledTrajectory
    loss_history: list  # best-so-far loss after each iteration
    violation_history: list  # violation of the best vector after each iteration
    normalized_loss_history: list
    best_loss: float
    iterations_used: int
    best_theta: np.ndarray
    initial_loss: float
    initial_violation: float
    sweep_loss_history: list  # raw end-of-sweep loss (drives stopping)
    sweep_violation_history: list
    cumulative_violation: list
    max_speed: float
    max_angular_rate: float
    failed: bool = False
    failure_reason: str = ""


def stopping(loss_history, tolerance: float, max_iterations: int) -> bool:
    """Stop on a relative loss plateau or on the iteration cap."""
    if not len(loss_history):
        raise InvalidArgument("history must be non-empty")
    if len(loss_history) >= max_iterations:
        return True
    if len(loss_history) >= 2:
        scale = max(1.0, abs(float(loss_history[0])))
        return abs(float(loss_history[-1]) - float(loss_history[-2])) < tolerance * scale
    return False


def normalized_loss(history):
    """Map a loss sequence to [0, 1]: 1 at the start, 0 at the best value.
    A history with no improvement maps to all zeros."""
    if not len(history):
        raise InvalidArgument("history must be non-empty")
    h = [float(x) for x in history]
    best = min(h)
    first = h[0]
    if first <= best:
        return [0.0] * len(h)
    span = first - best
    return [(x - best) / span for x in h]


def plan(scenario: Scenario, config: PlannerConfig,
         weights: LossWeights | None = None) -> PlanResult:
    """Run the full planning loop. Deterministic for fixed inputs."""
    w = config.weights or weights
    if w is None:
        raise InvalidArgument("no loss weights: pass them or set config.weights")
    n_intervals = config.resolved_intervals()
    objective = Objective(scenario, w, n_intervals, config.dt)

    theta0 = initial_breakpoints(scenario, config.n_agents)
    bd0, _ = objective.breakdown(theta0.flat)

    h = config.hyperparams
    if not config.influence_aware:
        h = replace(h, beta1=0.0, beta2=0.0)
    if config.consensus:
        graph = ConsensusGraph.chain(config.n_agents, config.anchored_consensus)
    else:
        graph = ConsensusGraph.empty(config.n_agents)

    start_e = rot_to_euler(scenario.start.rotation)
    goal_e = rot_to_euler(scenario.goal.rotation)
    anchor_start = np.concatenate([scenario.start.position, start_e.as_array()])
    anchor_goal = np.concatenate([scenario.goal.position, goal_e.as_array()])
    swarm = init_swarm(theta0.flat, bd0.total, graph, anchor_start, anchor_goal)

    constants = config.optimizer_constants
    if constants is None:
        constants = default_config(config.optimizer_kind)
    opts = [
        make_optimizer(config.optimizer_kind, 6, **constants)
        for _ in range(config.n_agents)
    ]

    best_hist, viol_hist, raw_hist, raw_viol = [], [], [], []
    failed = False
    reason = ""
    while True:
        try:
            swarm, opts, loss_after = sweep(
                swarm, objective, config.scheme, h, opts
            )
        except NumericFailure as exc:
            failed = True
            reason = str(exc)
            break
        raw_hist.append(loss_after)
        bd_cur, _ = objective.breakdown(swarm.theta_flat())
        raw_viol.append(bd_cur.violation)
        best_hist.append(swarm.global_best_loss)
        bd_best, _ = objective.breakdown(swarm.global_best)
        viol_hist.append(bd_best.violation)
        if stopping(raw_hist, config.tolerance, config.max_iterations):
            break

    if not best_hist:
        # first sweep already failed: report the initial state
        best_hist = [bd0.total]
        viol_hist = [bd0.violation]
        raw_hist = [bd0.total]
        raw_viol = [bd0.violation]

    bd_final, traj = objective.breakdown(swarm.global_best)
    if config.clamp_speed is not None:
        traj = _clamp_speed(traj, config.clamp_speed)
    return PlanResult(
        trajectory=traj,
        loss_history=best_hist,
        violation_history=viol_hist,
        normalized_loss_history=normalized_loss(best_hist),
        best_loss=float(min(best_hist)),
        iterations_used=len(best_hist),
        best_theta=swarm.global_best.copy(),
        initial_loss=bd0.total,
        initial_violation=bd0.violation,
        sweep_loss_history=raw_hist,
        sweep_violation_history=raw_viol,
        cumulative_violation=list(np.cumsum(raw_viol)),
        max_speed=traj.max_speed(),
        max_angular_rate=traj.max_angular_rate(),
        failed=failed,
        failure_reason=reason,
    )


def _clamp_speed(traj: SampledTrajectory, cap: float) -> SampledTrajectory:
    """Uniformly dilate time so the translational speed respects the cap."""
    speed = traj.max_speed()
    if speed <= cap:
        return traj
    scale = speed / cap
    return SampledTrajectory(traj.times * scale, traj.positions, traj.rotations)


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def export_result(result: PlanResult, out_dir) -> tuple:
    """Write ``trajectory.csv`` and ``metrics.csv``; byte-stable formatting.

    Trajectory rows are ``t,x,y,z,roll,pitch,yaw`` (radians); metrics rows
    are ``iteration,loss,violation,normalized_loss`` (1-based iterations).
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    traj_path = os.path.join(out_dir, "trajectory.csv")
    metrics_path = os.path.join(out_dir, "metrics.csv")
    traj = result.trajectory
    lines = ["t,x,y,z,roll,pitch,yaw"]
    for j in range(traj.n_samples):
        e = rot_to_euler(traj.rotations[j])
        p = traj.positions[j]
        lines.append(
            ",".join(
                _fmt(v)
                for v in (traj.times[j], p[0], p[1], p[2], e.roll, e.pitch, e.yaw)
            )
        )
    with open(traj_path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")

    lines = ["iteration,loss,violation,normalized_loss"]
    for k in range(result.iterations_used):
        lines.append(
            ",".join(
                [str(k + 1)]
                + [
                    _fmt(v)
                    for v in (
                        result.loss_history[k],
                        result.violation_history[k],
                        result.normalized_loss_history[k],
                    )
                ]
            )
        )
    with open(metrics_path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    return traj_path, metrics_path


# ---------------------------------------------------------------------------
# named parameter profiles
# ---------------------------------------------------------------------------

def profile_config(name: str) -> PlannerConfig:
    """Benchmark parameter sets shipped with the package.

    ``paper_sec5``: the simulation benchmark: 3 breakpoints, dt = 0.05 s,
    30 iterations, RMSProp with decay 0.01. ``paper_rmsprop``: the flight
    parameter set: dt = 0.2 s, iteration cap 100. Loss weights come from
    the scenario file in both cases.
    """
    hp = Hyperparams(alpha=0.0028, beta1=0.0028, beta2=0.0028, gamma=1.0)
    if name == "paper_sec5":
        return PlannerConfig(
            n_agents=3,
            dt=0.05,
            total_time=10.0,
            hyperparams=hp,
            optimizer_kind="rmsprop",
            optimizer_constants={"eta": 0.05, "decay": 0.01, "eps": 1e-8},
            max_iterations=30,
            tolerance=1e-12,
        )
    if name == "paper_rmsprop":
        return PlannerConfig(
            n_agents=3,
            dt=0.2,
            total_time=10.0,
            hyperparams=hp,
            optimizer_kind="rmsprop",
            optimizer_constants={"eta": 0.05, "decay": 0.01, "eps": 1e-8},
            max_iterations=100,
            tolerance=1e-6,
        )
    raise InvalidArgument(
        f"unknown profile {name!r}; valid: paper_sec5, paper_rmsprop"
    )


PROFILES = ("paper_sec5", "paper_rmsprop")
