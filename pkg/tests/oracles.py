"""Independent brute-force oracles used by the unit and acceptance tests.

Everything here is deliberately written against different primitives than
the package under test: plain python loops for the sums and scipy's matrix
exponential/logarithm for the rotation geometry.
"""

import math

import numpy as np
import scipy.linalg


def brute_rotation_distance(r1, r2):
    """(1 / sqrt(2)) * ||logm(R1^T R2)||_F via scipy."""
    rel = np.asarray(r1).T @ np.asarray(r2)
    lg = scipy.linalg.logm(rel)
    return float(np.linalg.norm(np.real(lg), "fro") / math.sqrt(2.0))


def brute_violation(positions, obstacles):
    """Average proximity penalty, looped exactly as written in the text."""
    m = len(positions)
    total = 0.0
    for center, radius in obstacles:
        acc = 0.0
        for j in range(m):
            d = math.dist(tuple(positions[j]), tuple(center))
            acc += max(1.0 - d / radius, 0.0)
        total += acc / m
    return total


def brute_loss(positions, rotations, obstacles, q, mu, lam):
    """Smoothness + rotation sum times the obstacle factor, looped."""
    nu = brute_violation(positions, obstacles)
    acc = 0.0
    for j in range(len(positions) - 1):
        dp = np.asarray(positions[j + 1]) - np.asarray(positions[j])
        term = float(dp @ (np.asarray(q) @ dp))
        term += mu * brute_rotation_distance(rotations[j], rotations[j + 1]) ** 2
        acc += term
    return acc * (1.0 + lam * nu), nu


def random_rotation(rng, max_angle=1.2):
    """Rotation via scipy expm of a random skew matrix (independent of the
    package's Rodrigues code)."""
    w = rng.uniform(-1.0, 1.0, 3)
    n = np.linalg.norm(w)
    if n > 0:
        w = w / n * rng.uniform(0.0, max_angle)
    W = np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])
    return np.real(scipy.linalg.expm(W))


def value_iteration(instance, gamma, iters=10_000, tol=1e-13):
    """Exhaustive fixed-point iteration, coded independently of the
    package's backup operator."""
    v = {s: 0.0 for s in instance.states}
    for _ in range(iters):
        nxt = {}
        for s in instance.states:
            best = math.inf
            for a in instance.actions:
                cand = instance.losses[(s, a)] + gamma * v[instance.transitions[(s, a)]]
                best = min(best, cand)
            nxt[s] = best
        delta = max(abs(nxt[s] - v[s]) for s in instance.states)
        v = nxt
        if delta < tol:
            break
    return v
