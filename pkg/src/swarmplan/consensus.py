"""Distributed agent layer: per-agent policy blocks, neighbor consensus,
finite-difference gradients and the composite update direction.

Each agent owns one 6-dof breakpoint block of the decision vector and
keeps a personal-best copy; the swarm tracks the best full vector seen so
far. A sweep walks the agents in index order (Gauss-Seidel: later agents
see earlier agents' fresh values), updating one block at a time through an
optimizer fed with the composite direction

    Pi = alpha * grad_i + beta1 * (pi_i - pbest_i)
       + beta2 * (pi_i - gbest_i) + sum_j w_ij * (pi_i - pi_j)

Neighbor sets form a chain along the trajectory. The chain is anchored:
the first and last agents count the fixed start/goal blocks among their
neighbors. Anchoring makes the uniform straight chord a fixed point of the
consensus term, so consensus acts as path smoothing rather than pulling
the end breakpoints off their segments (an unanchored chain drifts the end
agents toward the middle even at the optimum).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidInstance, NumericFailure

FD_KINDS = ("two_point", "three_point", "five_point")

START = "start"
GOAL = "goal"


@dataclass(frozen=True)
class FdScheme:
    """Finite-difference flavor plus perturbation magnitude."""

    kind: str = "five_point"
    delta: float = 1e-3

    def __post_init__(self):
        if self.kind not in FD_KINDS:
            raise InvalidArgument(f"unknown FD scheme {self.kind!r}; valid: {FD_KINDS}")
        if not (self.delta > 0.0):
            raise InvalidArgument("delta must be positive")


@dataclass(frozen=True)
class Hyperparams:
    """Learning rate, influence coefficients and discount factor."""

    alpha: float = 0.0028
    beta1: float = 0.0028
    beta2: float = 0.0028
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta1", "beta2"):
            if getattr(self, name) < 0.0:
                raise InvalidArgument(f"{name} must be >= 0")
        if not (0.0 <= self.gamma <= 1.0):
            raise InvalidArgument("gamma must lie in [0, 1]")


def fd_gradient(objective, theta, scheme: FdScheme, indices=None) -> np.ndarray:
    """Finite-difference gradient of a scalar objective along basis vectors.

    ``indices`` restricts the probed components (default: all). The
    two-point rule is the centered difference; three-point is the one-sided
    second-order rule; five-point is the fourth-order centered rule.
    """
    theta = np.asarray(theta, dtype=float)
    if indices is None:
        indices = range(theta.size)
    d = scheme.delta
    indices = list(indices)
    grad = np.empty(len(indices))

    def probe(k, offset):
        x = theta.copy()
        x[k] += offset
        val = float(objective(x))
        if not np.isfinite(val):
            raise NumericFailure(
                f"objective returned {val} at component {k}", where=k
            )
        return val

    if scheme.kind == "three_point":
        f0 = float(objective(theta))
        if not np.isfinite(f0):
            raise NumericFailure("objective non-finite at base point", where=None)
    for out, k in enumerate(indices):
        if scheme.kind == "two_point":
            grad[out] = (probe(k, d) - probe(k, -d)) / (2.0 * d)
        elif scheme.kind == "three_point":
            grad[out] = (
                4.0 * probe(k, d) - probe(k, 2.0 * d) - 3.0 * f0
            ) / (2.0 * d)
        else:
            grad[out] = (
                -probe(k, 2.0 * d)
                + 8.0 * probe(k, d)
                - 8.0 * probe(k, -d)
                + probe(k, -2.0 * d)
            ) / (12.0 * d)
    return grad


class ConsensusGraph:
    """Weighted neighbor lists. A neighbor is an agent index or one of the
    anchor labels ``"start"`` / ``"goal"``. Weights per agent sum to 1
    unless the agent has no neighbors at all."""

    def __init__(self, neighbors):
        self.neighbors = [list(entry) for entry in neighbors]
        n = len(self.neighbors)
        for i, entry in enumerate(self.neighbors):
            if entry:
                total = sum(w for _, w in entry)
                if abs(total - 1.0) > 1e-12:
                    raise InvalidArgument(
                        f"weights of agent {i} sum to {total}, expected 1"
                    )
            for ref, w in entry:
                if w < 0.0:
                    raise InvalidArgument("weights must be non-negative")
                if isinstance(ref, int):
                    if not (0 <= ref < n) or ref == i:
                        raise InvalidArgument(f"bad neighbor index {ref}")
                elif ref not in (START, GOAL):
                    raise InvalidArgument(f"bad neighbor label {ref!r}")
        # symmetry as a relation over real agents
        for i, entry in enumerate(self.neighbors):
            for ref, _ in entry:
                if isinstance(ref, int):
                    back = [r for r, _ in self.neighbors[ref]]
                    if i not in back:
                        raise InvalidArgument(
                            f"graph not symmetric: {i}->{ref} without back edge"
                        )

    @property
    def n(self) -> int:
        return len(self.neighbors)

    @staticmethod
    def chain(n: int, anchored: bool = True) -> "ConsensusGraph":
        """Chain along trajectory order; with ``anchored`` the end agents
        treat the fixed start/goal blocks as additional neighbors."""
        if n < 1:
            raise InvalidArgument("need at least one agent")
        entries = []
        for i in range(n):
            refs = []
            if i == 0:
                refs.append(START if anchored else None)
            else:
                refs.append(i - 1)
            if i == n - 1:
                refs.append(GOAL if anchored else None)
            else:
                refs.append(i + 1)
            refs = [r for r in refs if r is not None]
            w = 1.0 / len(refs)
            entries.append([(r, w) for r in refs])
        return ConsensusGraph(entries)

    @staticmethod
    def empty(n: int) -> "ConsensusGraph":
        return ConsensusGraph([[] for _ in range(n)])


@dataclass
class AgentState:
    index: int
    params: np.ndarray
    personal_best: np.ndarray
    personal_best_loss: float

    def copy(self) -> "AgentState":
        return AgentState(self.index, self.params.copy(),
                          self.personal_best.copy(), self.personal_best_loss)


@dataclass
class SwarmState:
    agents: list
    global_best: np.ndarray
    global_best_loss: float
    graph: ConsensusGraph
    anchor_start: np.ndarray = field(default_factory=lambda: np.zeros(6))
    anchor_goal: np.ndarray = field(default_factory=lambda: np.zeros(6))

    @property
    def n(self) -> int:
        return len(self.agents)

    def theta_flat(self) -> np.ndarray:
        return np.concatenate([a.params for a in self.agents])

    def copy(self) -> "SwarmState":
        return SwarmState(
            [a.copy() for a in self.agents],
            self.global_best.copy(),
            self.global_best_loss,
            self.graph,
            self.anchor_start.copy(),
            self.anchor_goal.copy(),
        )


def init_swarm(theta_flat, initial_loss: float, graph: ConsensusGraph,
               anchor_start, anchor_goal) -> SwarmState:
    """Personal and global bests start at the initial decision vector."""
    theta_flat = np.asarray(theta_flat, dtype=float)
    if theta_flat.size != graph.n * 6:
        raise InvalidArgument("decision vector length must be 6 * n_agents")
    agents = []
    for i in range(graph.n):
        block = theta_flat[6 * i:6 * i + 6].copy()
        agents.append(AgentState(i, block, block.copy(), initial_loss))
    return SwarmState(agents, theta_flat.copy(), initial_loss, graph,
                      np.asarray(anchor_start, float).copy(),
                      np.asarray(anchor_goal, float).copy())


def _block(swarm: SwarmState, ref):
    if ref == START:
        return swarm.anchor_start
    if ref == GOAL:
        return swarm.anchor_goal
    return swarm.agents[ref].params


def consensus_term(i: int, swarm: SwarmState) -> np.ndarray:
    """Weighted disagreement with neighbors; zero for an isolated agent."""
    pi = swarm.agents[i].params
    out = np.zeros(6)
    for ref, w in swarm.graph.neighbors[i]:
        out += w * (pi - _block(swarm, ref))
    return out


def composite_direction(i: int, grad_block, swarm: SwarmState,
                        h: Hyperparams) -> np.ndarray:
    """Gradient, influence and consensus contributions for agent i."""
    agent = swarm.agents[i]
    gbest_block = swarm.global_best[6 * i:6 * i + 6]
    return (
        h.alpha * np.asarray(grad_block, float)
        + h.beta1 * (agent.params - agent.personal_best)
        + h.beta2 * (agent.params - gbest_block)
        + consensus_term(i, swarm)
    )


def sweep(swarm: SwarmState, objective, scheme: FdScheme, h: Hyperparams,
          opt_states: list):
    """One Gauss-Seidel pass over all agents.

    Returns ``(swarm', opt_states', loss_after)`` with the inputs left
    untouched; on numeric failure the exception propagates and the caller
    keeps its unmodified state.
    """
    if len(opt_states) != swarm.n:
        raise InvalidArgument("need one optimizer state per agent")
    work = swarm.copy()
    opts = [o.copy() for o in opt_states]
    loss_after = work.global_best_loss
    for i in range(work.n):
        theta = work.theta_flat()
        block = range(6 * i, 6 * i + 6)
        grad = fd_gradient(objective, theta, scheme, indices=block)
        direction = composite_direction(i, grad, work, h)
        delta = opts[i].step(direction)
        agent = work.agents[i]
        agent.params = agent.params + delta
        loss_after = float(objective(work.theta_flat()))
        if not np.isfinite(loss_after):
            raise NumericFailure(
                f"loss became non-finite after updating agent {i}", where=i
            )
        if loss_after < agent.personal_best_loss:
            agent.personal_best = agent.params.copy()
            agent.personal_best_loss = loss_after
        if loss_after < work.global_best_loss:
            work.global_best = work.theta_flat()
            work.global_best_loss = loss_after
    return work, opts, loss_after


def value_estimate(loss_history, gamma: float) -> float:
    """Discounted sum of negated losses; the bookkeeping value signal."""
    if not (0.0 <= gamma <= 1.0):
        raise InvalidArgument("gamma must lie in [0, 1]")
    total = 0.0
    for k, lk in enumerate(loss_history):
        total += (gamma ** k) * (-float(lk))
    return total


# ---------------------------------------------------------------------------
# finite verification instances for the distributed backup operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteInstance:
    """Finite deterministic planning instance: joint actions, a transition
    table and a per-(state, action) loss table. A verification vehicle for
    the backup operator; the continuous planner state is not enumerable."""

    states: tuple
    actions: tuple
    transitions: dict
    losses: dict

    def __post_init__(self):
        state_set = set(self.states)
        for s in self.states:
            for a in self.actions:
                if (s, a) not in self.transitions:
                    raise InvalidInstance(f"missing transition for {(s, a)!r}")
                if (s, a) not in self.losses:
                    raise InvalidInstance(f"missing loss for {(s, a)!r}")
                nxt = self.transitions[(s, a)]
                if nxt not in state_set:
                    raise InvalidInstance(
                        f"transition {(s, a)!r} reaches unknown state {nxt!r}"
                    )


def bellman_apply(V, instance: FiniteInstance, gamma: float) -> dict:
    """One application of the min-over-joint-actions backup:
    (TV)(s) = min_a [loss(s, a) + gamma * V(s')]."""
    if not (0.0 <= gamma <= 1.0):
        raise InvalidArgument("gamma must lie in [0, 1]")
    out = {}
    for s in instance.states:
        best = None
        for a in instance.actions:
            val = instance.losses[(s, a)] + gamma * V[instance.transitions[(s, a)]]
            if best is None or val < best:
                best = val
        out[s] = best
    return out
