"""The five per-agent update rules driven by the composite direction.

Every optimizer consumes the composite direction as its raw gradient
signal ``g`` and returns an additive parameter delta. Accumulators are
6-vectors owned by a single agent; squares and divisions are element-wise
and epsilon sits inside the square roots.
"""

from __future__ import annotations

import copy

import numpy as np

from .errors import InvalidArgument, NumericFailure

KINDS = ("mgd", "adagrad", "rmsprop", "adadelta", "adam")


class _Base:
    kind = ""

    def step(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, arr):
        if not np.all(np.isfinite(arr)):
            raise NumericFailure(
                f"{self.kind} produced a non-finite update", where=self.kind
            )
        return arr

    def copy(self):
        return copy.deepcopy(self)


class MGD(_Base):
    """Momentum gradient descent: v <- beta*v - g; delta = v."""

    kind = "mgd"

    def __init__(self, dim: int, beta: float = 0.9, eta: float = 1.0):
        self.beta = beta
        self.eta = eta
        self.v = np.zeros(dim)

    def step(self, g):
        self.v = self.beta * self.v - self.eta * np.asarray(g, float)
        return self._check(self.v.copy())


class AdaGrad(_Base):
    """Accumulated squared gradients: delta = -eta * g / sqrt(G + eps)."""

    kind = "adagrad"

    def __init__(self, dim: int, eta: float = 1.0, eps: float = 1e-8):
        self.eta = eta
        self.eps = eps
        self.G = np.zeros(dim)

    def step(self, g):
        g = np.asarray(g, float)
        self.G += g * g
        return self._check(-self.eta * g / np.sqrt(self.G + self.eps))


class RMSProp(_Base):
    """Decaying average of squared gradients: delta = -eta*g/sqrt(E + eps)."""

    kind = "rmsprop"

    def __init__(self, dim: int, eta: float = 1.0, decay: float = 0.9,
                 eps: float = 1e-8):
        self.eta = eta
        self.decay = decay
        self.eps = eps
        self.E = np.zeros(dim)

    def step(self, g):
        g = np.asarray(g, float)
        self.E = self.decay * self.E + (1.0 - self.decay) * g * g
        return self._check(-self.eta * g / np.sqrt(self.E + self.eps))


class AdaDelta(_Base):
    """Ratio of decaying update/gradient magnitudes; no learning rate."""

    kind = "adadelta"

    def __init__(self, dim: int, rho: float = 0.95, eps: float = 1e-8):
        self.rho = rho
        self.eps = eps
        self.Eg = np.zeros(dim)
        self.Ed = np.zeros(dim)

    def step(self, g):
        g = np.asarray(g, float)
        self.Eg = self.rho * self.Eg + (1.0 - self.rho) * g * g
        delta = -np.sqrt(self.Ed + self.eps) / np.sqrt(self.Eg + self.eps) * g
        self.Ed = self.rho * self.Ed + (1.0 - self.rho) * delta * delta
        return self._check(delta)


class Adam(_Base):
    """Bias-corrected first/second moments: delta = -eta*mhat/sqrt(vhat+eps)."""

    kind = "adam"

    def __init__(self, dim: int, eta: float = 1.0, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.eta = eta
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, g):
        g = np.asarray(g, float)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g * g
        mhat = self.m / (1.0 - self.beta1 ** self.t)
        vhat = self.v / (1.0 - self.beta2 ** self.t)
        return self._check(-self.eta * mhat / np.sqrt(vhat + self.eps))


_CLASSES = {
    "mgd": MGD,
    "adagrad": AdaGrad,
    "rmsprop": RMSProp,
    "adadelta": AdaDelta,
    "adam": Adam,
}


def default_config(kind: str, profile: str = "default") -> dict:
    """Documented constants per kind.

    ``eta`` defaults to 1 everywhere: the composite direction already
    carries the learning rate, so the optimizers see a pre-scaled signal.
    The ``paper`` profile swaps the RMSProp decay for the benchmark value
    0.01; everything else is shared.
    """
    if kind not in KINDS:
        raise InvalidArgument(f"unknown optimizer kind {kind!r}; valid: {KINDS}")
    base: dict = {"eta": 1.0}
    if kind == "mgd":
        base["beta"] = 0.9
    elif kind == "adagrad":
        base["eps"] = 1e-8
    elif kind == "rmsprop":
        base["decay"] = 0.01 if profile == "paper" else 0.9
        base["eps"] = 1e-8
    elif kind == "adadelta":
        base["rho"] = 0.95
        base["eps"] = 1e-8
        base.pop("eta")  # the rule has no step-scale knob
    elif kind == "adam":
        base["beta1"] = 0.9
        base["beta2"] = 0.999
        base["eps"] = 1e-8
    return base


def make_optimizer(kind: str, dim: int, **constants) -> _Base:
    if kind not in _CLASSES:
        raise InvalidArgument(f"unknown optimizer kind {kind!r}; valid: {KINDS}")
    return _CLASSES[kind](dim, **constants)


def optimizer_step(state: _Base, g):
    """Functional wrapper: returns (delta, advanced copy of state)."""
    nxt = state.copy()
    delta = nxt.step(g)
    return delta, nxt
