"""Decision vector to trajectory mapping and the obstacle-aware loss.

The decision vector stacks one 6-dof block per internal breakpoint:
``(x, y, z, yaw, pitch, roll)``. Between consecutive knots (start,
breakpoints, goal; uniform knot times) positions interpolate linearly and
orientations follow the geodesic on SO(3). The loss couples translational
smoothness, rotational smoothness and an average obstacle-proximity
penalty:

    total = sum_j [dp_j^T Q dp_j + mu * d_R(R_j, R_{j+1})^2] * (1 + lambda * nu)

with nu the per-obstacle mean of max(1 - d/r, 0) over all samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidArgument
from .liegroup import EulerAngles, Pose, euler_to_rot, rot_to_euler, so3_log


@dataclass(frozen=True)
class Obstacle:
    """Spherical obstacle: center in meters, influence radius in meters."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)):
            raise InvalidArgument("obstacle center must be finite")
        if not (self.radius > 0.0):
            raise InvalidArgument("obstacle radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(3)
        hi = np.asarray(self.hi, dtype=float).reshape(3)
        if not np.all(lo < hi):
            raise InvalidArgument("box must have lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


@dataclass(frozen=True)
class Scenario:
    start: Pose
    goal: Pose
    obstacles: tuple
    bounds: Box

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not self.bounds.contains(self.start.position):
            raise InvalidArgument("start must lie inside the bounds")
        if not self.bounds.contains(self.goal.position):
            raise InvalidArgument("goal must lie inside the bounds")

    def obstacle_arrays(self):
        if not self.obstacles:
            return np.zeros((0, 3)), np.zeros(0)
        centers = np.array([o.center for o in self.obstacles])
        radii = np.array([o.radius for o in self.obstacles])
        return centers, radii


@dataclass(frozen=True)
class LossWeights:
    """Q weighs translational increments, mu rotational ones, lam the
    obstacle penalty factor."""

    Q: np.ndarray
    mu: float
    lam: float

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        if q.shape == (3,):
            q = np.diag(q)
        if q.shape != (3, 3) or not np.allclose(q, q.T, atol=1e-12):
            raise InvalidArgument("Q must be a symmetric 3x3 matrix")
        if np.min(np.linalg.eigvalsh(q)) <= 0.0:
            raise InvalidArgument("Q must be positive definite")
        if not (self.mu >= 0.0 and np.isfinite(self.mu)):
            raise InvalidArgument("mu must be finite and >= 0")
        if not (self.lam >= 0.0 and np.isfinite(self.lam)):
            raise InvalidArgument("lambda must be finite and >= 0")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "lam", float(self.lam))


class BreakpointVector:
    """n x 6 decision block: per breakpoint (x, y, z, yaw, pitch, roll)."""

    def __init__(self, params):
        p = np.asarray(params, dtype=float)
        if p.ndim == 1:
            if p.size % 6:
                raise InvalidArgument("flat decision vector length must be 6n")
            p = p.reshape(-1, 6)
        if p.ndim != 2 or p.shape[1] != 6 or p.shape[0] < 1:
            raise InvalidArgument("params must have shape (n, 6) with n >= 1")
        if not np.all(np.isfinite(p)):
            raise InvalidArgument("params must be finite")
        self.params = p

    @property
    def n(self) -> int:
        return self.params.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.params.reshape(-1)

    def copy(self) -> "BreakpointVector":
        return BreakpointVector(self.params.copy())


@dataclass(frozen=True)
class SampledTrajectory:
    """Uniformly time-sampled pose sequence."""

    times: np.ndarray
    positions: np.ndarray
    rotations: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size < 2 or np.any(np.diff(t) <= 0.0):
            raise InvalidArgument("timestamps must be strictly increasing, N >= 1")

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def pose(self, j: int) -> Pose:
        return Pose(self.rotations[j], self.positions[j])

    def yaw(self, j: int) -> float:
        return rot_to_euler(self.rotations[j]).yaw

    def max_speed(self) -> float:
        dp = np.diff(self.positions, axis=0)
        return float(np.max(np.linalg.norm(dp, axis=1)) / self.dt)

    def max_angular_rate(self) -> float:
        rel = np.einsum("mji,mjk->mik", self.rotations[:-1], self.rotations[1:])
        s = 0.5 * np.sqrt(
            (rel[:, 2, 1] - rel[:, 1, 2]) ** 2
            + (rel[:, 0, 2] - rel[:, 2, 0]) ** 2
            + (rel[:, 1, 0] - rel[:, 0, 1]) ** 2
        )
        c = 0.5 * (np.trace(rel, axis1=1, axis2=2) - 1.0)
        return float(np.max(np.arctan2(s, c)) / self.dt)


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    smoothness: float
    rotation: float
    violation: float


def interpolate(scenario: Scenario, theta: BreakpointVector, n_intervals: int,
                dt: float) -> SampledTrajectory:
    """Sample the knot chain [start, breakpoints..., goal] at n_intervals+1
    uniform instants. Endpoint samples are the scenario poses, bit for bit."""
    if n_intervals < theta.n + 1:
        raise InvalidArgument(
            f"need at least {theta.n + 1} intervals for {theta.n} breakpoints"
        )
    if dt <= 0.0:
        raise InvalidArgument("dt must be positive")
    kn = theta.n + 2
    knot_pos = np.empty((kn, 3))
    knot_pos[0] = scenario.start.position
    knot_pos[1:-1] = theta.params[:, :3]
    knot_pos[-1] = scenario.goal.position
    knot_rot = np.empty((kn, 3, 3))
    knot_rot[0] = scenario.start.rotation
    for i in range(theta.n):
        y, p, r = theta.params[i, 3:]
        knot_rot[i + 1] = euler_to_rot(EulerAngles(y, p, r))
    knot_rot[-1] = scenario.goal.rotation
    seg_rotvec = np.empty((kn - 1, 3))
    for k in range(kn - 1):
        # non-strict log: a probe that lands on the pi branch picks the
        # documented branch instead of aborting the evaluation
        seg_rotvec[k] = so3_log(knot_rot[k].T @ knot_rot[k + 1], strict=False)
    positions, rotations = _kernels.sample_poses(
        knot_pos, knot_rot, seg_rotvec, n_intervals + 1
    )
    positions[0] = scenario.start.position
    positions[-1] = scenario.goal.position
    rotations[0] = scenario.start.rotation
    rotations[-1] = scenario.goal.rotation
    times = np.arange(n_intervals + 1, dtype=float) * dt
    return SampledTrajectory(times, positions, rotations)


def violation(traj: SampledTrajectory, obstacles) -> float:
    obstacles = tuple(obstacles)
    if not obstacles:
        return 0.0
    centers = np.array([o.center for o in obstacles])
    radii = np.array([o.radius for o in obstacles])
    return float(_kernels.violation_sum(traj.positions, centers, radii))


def loss(traj: SampledTrajectory, obstacles, w: LossWeights) -> LossBreakdown:
    nu = violation(traj, obstacles)
    smooth, rotsq = _kernels.loss_terms(traj.positions, traj.rotations, w.Q)
    total = (smooth + w.mu * rotsq) * (1.0 + w.lam * nu)
    return LossBreakdown(float(total), float(smooth), float(rotsq), nu)


def evaluate(scenario: Scenario, theta: BreakpointVector, n_intervals: int,
             dt: float, w: LossWeights):
    """Objective evaluation: interpolate then score. Returns (breakdown, traj)."""
    traj = interpolate(scenario, theta, n_intervals, dt)
    return loss(traj, scenario.obstacles, w), traj


def initial_breakpoints(scenario: Scenario, n: int) -> BreakpointVector:
    """Breakpoints on the straight start->goal chord at uniform fractions,
    zero Euler angles. The reproducible starting guess for every plan."""
    if n < 1:
        raise InvalidArgument("need at least one breakpoint")
    params = np.zeros((n, 6))
    for i in range(n):
        f = (i + 1) / (n + 1)
        params[i, :3] = scenario.start.position + f * (
            scenario.goal.position - scenario.start.position
        )
    return BreakpointVector(params)


class Objective:
    """Callable planning objective over flat decision vectors."""

    def __init__(self, scenario: Scenario, weights: LossWeights,
                 n_intervals: int, dt: float):
        self.scenario = scenario
        self.weights = weights
        self.n_intervals = n_intervals
        self.dt = dt

    def __call__(self, theta_flat) -> float:
        bd, _ = evaluate(
            self.scenario, BreakpointVector(theta_flat), self.n_intervals,
            self.dt, self.weights
        )
        return bd.total

    def breakdown(self, theta_flat):
        return evaluate(
            self.scenario, BreakpointVector(theta_flat), self.n_intervals,
            self.dt, self.weights
        )


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

def _pose_from_json(obj) -> Pose:
    y, p, r = obj["ypr"]
    return Pose(euler_to_rot(EulerAngles(y, p, r)), np.asarray(obj["xyz"], float))


def load_scenario(path):
    """Read a scenario JSON file. Returns (Scenario, LossWeights)."""
    with open(path) as f:
        doc = json.load(f)
    scenario = Scenario(
        start=_pose_from_json(doc["start"]),
        goal=_pose_from_json(doc["goal"]),
        obstacles=tuple(
            Obstacle(np.asarray(o["center"], float), float(o["radius"]))
            for o in doc["obstacles"]
        ),
        bounds=Box(np.asarray(doc["bounds"]["min"], float),
                   np.asarray(doc["bounds"]["max"], float)),
    )
    w = doc["weights"]
    weights = LossWeights(np.asarray(w["Q_diag"], float), float(w["mu"]),
                          float(w["lambda"]))
    return scenario, weights


def dump_scenario(scenario: Scenario, weights: LossWeights, path):
    start_e = rot_to_euler(scenario.start.rotation)
    goal_e = rot_to_euler(scenario.goal.rotation)
    doc = {
        "start": {"xyz": list(scenario.start.position),
                  "ypr": [start_e.yaw, start_e.pitch, start_e.roll]},
        "goal": {"xyz": list(scenario.goal.position),
                 "ypr": [goal_e.yaw, goal_e.pitch, goal_e.roll]},
        "obstacles": [
            {"center": list(o.center), "radius": o.radius}
            for o in scenario.obstacles
        ],
        "bounds": {"min": list(scenario.bounds.lo),
                   "max": list(scenario.bounds.hi)},
        "weights": {"Q_diag": list(np.diag(weights.Q)), "mu": weights.mu,
                    "lambda": weights.lam},
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
