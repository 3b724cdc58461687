"""Hot numeric kernels for trajectory sampling and loss evaluation.

The planner evaluates its objective thousands of times per run (every
finite-difference probe resamples the trajectory and rescores it), so these
inner loops dominate runtime. Each kernel exists twice:

  * ``*_numba`` -- loop form compiled with ``numba.njit(cache=True)``
  * ``*_numpy`` -- vectorized fallback with identical semantics

The module-level names (``sample_poses``, ``violation_sum``, ``loss_terms``)
bind to the numba variants unless the environment variable
``SWARMPLAN_NO_NUMBA`` is set (any non-empty value) or numba is unavailable.
``benchmarks/bench_kernels.py`` times both paths side by side.

No fastmath anywhere: results must be bit-reproducible run to run.
"""

import math
import os

import numpy as np

_DISABLED = bool(os.environ.get("SWARMPLAN_NO_NUMBA"))

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dep, belt and braces
        _DISABLED = True

USING_NUMBA = not _DISABLED


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _rodrigues_batch(w):
    """Rotation matrices for a batch of axis-angle vectors, shape (M, 3)."""
    m = w.shape[0]
    theta = np.sqrt(np.sum(w * w, axis=1))
    out = np.empty((m, 3, 3))
    small = theta < 1e-8
    a = np.empty(m)
    b = np.empty(m)
    t2 = theta * theta
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 1.0, np.sin(theta) / np.where(small, 1.0, theta))
        b = np.where(small, 0.5, (1.0 - np.cos(theta)) / np.where(small, 1.0, t2))
    wx, wy, wz = w[:, 0], w[:, 1], w[:, 2]
    # W and W@W written out component-wise to stay allocation-friendly
    out[:, 0, 0] = 1.0 + b * (-(wy * wy + wz * wz))
    out[:, 0, 1] = -a * wz + b * (wx * wy)
    out[:, 0, 2] = a * wy + b * (wx * wz)
    out[:, 1, 0] = a * wz + b * (wx * wy)
    out[:, 1, 1] = 1.0 + b * (-(wx * wx + wz * wz))
    out[:, 1, 2] = -a * wx + b * (wy * wz)
    out[:, 2, 0] = -a * wy + b * (wx * wz)
    out[:, 2, 1] = a * wx + b * (wy * wz)
    out[:, 2, 2] = 1.0 + b * (-(wx * wx + wy * wy))
    return out


def sample_poses_numpy(knot_pos, knot_rot, seg_rotvec, n_samples):
    """Sample the knot chain at ``n_samples`` uniform instants.

    Positions are piecewise-linear, rotations piecewise-geodesic:
    ``R(alpha) = R_k @ exp(alpha * log(R_k^T R_{k+1}))`` on segment k.
    ``seg_rotvec[k]`` carries that per-segment log, precomputed by the caller.
    """
    kn = knot_pos.shape[0]
    j = np.arange(n_samples, dtype=np.float64)
    u = j * (kn - 1) / (n_samples - 1)
    k = np.minimum(u.astype(np.int64), kn - 2)
    alpha = u - k
    positions = knot_pos[k] + alpha[:, None] * (knot_pos[k + 1] - knot_pos[k])
    w = alpha[:, None] * seg_rotvec[k]
    rotations = np.einsum("mij,mjk->mik", knot_rot[k], _rodrigues_batch(w))
    return positions, rotations


def violation_sum_numpy(positions, centers, radii):
    """Average proximity penalty: sum over obstacles of the per-sample mean
    of ``max(1 - d/r, 0)``."""
    if centers.shape[0] == 0:
        return 0.0
    d = np.sqrt(
        np.sum((positions[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    )
    pen = np.maximum(1.0 - d / radii[None, :], 0.0)
    return float(np.sum(np.mean(pen, axis=0)))


def loss_terms_numpy(positions, rotations, q):
    """Smoothness sums over consecutive samples.

    Returns ``(sum dp^T Q dp, sum d_R^2)`` where d_R is the relative
    rotation angle, computed with the atan2 form (well conditioned away
    from angle pi, which consecutive samples never approach).
    """
    dp = np.diff(positions, axis=0)
    smooth = float(np.sum(dp * (dp @ q.T)))
    rel = np.einsum("mji,mjk->mik", rotations[:-1], rotations[1:])
    s = 0.5 * np.sqrt(
        (rel[:, 2, 1] - rel[:, 1, 2]) ** 2
        + (rel[:, 0, 2] - rel[:, 2, 0]) ** 2
        + (rel[:, 1, 0] - rel[:, 0, 1]) ** 2
    )
    c = 0.5 * (np.trace(rel, axis1=1, axis2=2) - 1.0)
    theta = np.arctan2(s, c)
    return smooth, float(np.sum(theta * theta))


# ---------------------------------------------------------------------------
# numba loop implementations (same math, loop form)
# ---------------------------------------------------------------------------

def _sample_poses_loops(knot_pos, knot_rot, seg_rotvec, n_samples):
    kn = knot_pos.shape[0]
    positions = np.empty((n_samples, 3))
    rotations = np.empty((n_samples, 3, 3))
    for j in range(n_samples):
        u = j * (kn - 1) / (n_samples - 1)
        k = int(u)
        if k > kn - 2:
            k = kn - 2
        alpha = u - k
        for d in range(3):
            positions[j, d] = knot_pos[k, d] + alpha * (
                knot_pos[k + 1, d] - knot_pos[k, d]
            )
        wx = alpha * seg_rotvec[k, 0]
        wy = alpha * seg_rotvec[k, 1]
        wz = alpha * seg_rotvec[k, 2]
        theta = math.sqrt(wx * wx + wy * wy + wz * wz)
        if theta < 1e-8:
            a = 1.0
            b = 0.5
        else:
            a = math.sin(theta) / theta
            b = (1.0 - math.cos(theta)) / (theta * theta)
        r00 = 1.0 + b * (-(wy * wy + wz * wz))
        r01 = -a * wz + b * (wx * wy)
        r02 = a * wy + b * (wx * wz)
        r10 = a * wz + b * (wx * wy)
        r11 = 1.0 + b * (-(wx * wx + wz * wz))
        r12 = -a * wx + b * (wy * wz)
        r20 = -a * wy + b * (wx * wz)
        r21 = a * wx + b * (wy * wz)
        r22 = 1.0 + b * (-(wx * wx + wy * wy))
        for row in range(3):
            k0 = knot_rot[k, row, 0]
            k1 = knot_rot[k, row, 1]
            k2 = knot_rot[k, row, 2]
            rotations[j, row, 0] = k0 * r00 + k1 * r10 + k2 * r20
            rotations[j, row, 1] = k0 * r01 + k1 * r11 + k2 * r21
            rotations[j, row, 2] = k0 * r02 + k1 * r12 + k2 * r22
    return positions, rotations


def _violation_sum_loops(positions, centers, radii):
    m = positions.shape[0]
    total = 0.0
    for b in range(centers.shape[0]):
        acc = 0.0
        cx = centers[b, 0]
        cy = centers[b, 1]
        cz = centers[b, 2]
        r = radii[b]
        for j in range(m):
            dx = positions[j, 0] - cx
            dy = positions[j, 1] - cy
            dz = positions[j, 2] - cz
            d = math.sqrt(dx * dx + dy * dy + dz * dz)
            pen = 1.0 - d / r
            if pen > 0.0:
                acc += pen
        total += acc / m
    return total


def _loss_terms_loops(positions, rotations, q):
    m = positions.shape[0]
    smooth = 0.0
    rotsq = 0.0
    for j in range(m - 1):
        dx = positions[j + 1, 0] - positions[j, 0]
        dy = positions[j + 1, 1] - positions[j, 1]
        dz = positions[j + 1, 2] - positions[j, 2]
        smooth += (
            dx * (q[0, 0] * dx + q[0, 1] * dy + q[0, 2] * dz)
            + dy * (q[1, 0] * dx + q[1, 1] * dy + q[1, 2] * dz)
            + dz * (q[2, 0] * dx + q[2, 1] * dy + q[2, 2] * dz)
        )
        # rel = R_j^T R_{j+1}; only the entries feeding atan2 are needed
        r00 = 0.0
        r11 = 0.0
        r22 = 0.0
        r21 = 0.0
        r12 = 0.0
        r02 = 0.0
        r20 = 0.0
        r10 = 0.0
        r01 = 0.0
        for t in range(3):
            r00 += rotations[j, t, 0] * rotations[j + 1, t, 0]
            r11 += rotations[j, t, 1] * rotations[j + 1, t, 1]
            r22 += rotations[j, t, 2] * rotations[j + 1, t, 2]
            r21 += rotations[j, t, 2] * rotations[j + 1, t, 1]
            r12 += rotations[j, t, 1] * rotations[j + 1, t, 2]
            r02 += rotations[j, t, 0] * rotations[j + 1, t, 2]
            r20 += rotations[j, t, 2] * rotations[j + 1, t, 0]
            r10 += rotations[j, t, 1] * rotations[j + 1, t, 0]
            r01 += rotations[j, t, 0] * rotations[j + 1, t, 1]
        s = 0.5 * math.sqrt(
            (r21 - r12) ** 2 + (r02 - r20) ** 2 + (r10 - r01) ** 2
        )
        c = 0.5 * (r00 + r11 + r22 - 1.0)
        theta = math.atan2(s, c)
        rotsq += theta * theta
    return smooth, rotsq


if USING_NUMBA:
    sample_poses_numba = njit(cache=True)(_sample_poses_loops)
    violation_sum_numba = njit(cache=True)(_violation_sum_loops)
    loss_terms_numba = njit(cache=True)(_loss_terms_loops)
    sample_poses = sample_poses_numba
    violation_sum = violation_sum_numba
    loss_terms = loss_terms_numba
else:
    sample_poses = sample_poses_numpy
    violation_sum = violation_sum_numpy
    loss_terms = loss_terms_numpy


def warmup():
    """Force JIT compilation of all kernels (no-op on the numpy path)."""
    kp = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    kr = np.stack([np.eye(3), np.eye(3)])
    sv = np.zeros((1, 3))
    pos, rot = sample_poses(kp, kr, sv, 3)
    violation_sum(pos, np.array([[0.0, 0.0, 1.0]]), np.array([0.5]))
    loss_terms(pos, rot, np.eye(3))
