"""Exact SO(3)/SE(3) primitives: hat/vee, exp/log, geodesic distance, Euler.

Rotations are plain 3x3 ``float64`` arrays; poses pair a rotation with a
position vector. All functions are pure and allocation-light, so they are
safe to call from any thread.

Conventions:
  * twists stack linear before angular velocity, ``(v, w)``
  * pose composition is body-frame (right multiplication)
  * Euler angles are intrinsic ZYX, i.e. yaw about z, then pitch, then roll
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRotation, InvalidArgument

# Below this rotation angle the closed-form Rodrigues coefficients are
# replaced by their series expansions (keeps double error < 1e-12).
SMALL_ANGLE = 1e-8

# log() is ambiguous within this margin of the angle-pi branch cut.
PI_MARGIN = 1e-6


@dataclass(frozen=True)
class Twist:
    """Body-frame velocity: linear part in m/s, angular part in rad/s."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", _vec3(self.linear, "linear"))
        object.__setattr__(self, "angular", _vec3(self.angular, "angular"))

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])


@dataclass(frozen=True)
class Pose:
    """Rigid-body pose: 3x3 rotation matrix plus position in meters."""

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3) or not np.all(np.isfinite(R)):
            raise InvalidArgument("rotation must be a finite 3x3 matrix")
        check_rotation(R)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "position", _vec3(self.position, "position"))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.position
        return T


@dataclass(frozen=True)
class EulerAngles:
    """Intrinsic ZYX angles in radians: yaw, pitch, roll."""

    yaw: float
    pitch: float
    roll: float

    def as_array(self) -> np.ndarray:
        return np.array([self.yaw, self.pitch, self.roll])


def _vec3(x, name) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise InvalidArgument(f"{name} must be finite")
    return v


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return (
        np.all(np.abs(R.T @ R - np.eye(3)) < tol)
        and abs(np.linalg.det(R) - 1.0) < tol
    )


def check_rotation(R: np.ndarray, tol: float = 1e-9):
    if not is_rotation(R, tol):
        raise InvalidArgument("matrix is not a rotation (orthonormal, det +1)")


def skew(w) -> np.ndarray:
    """Cross-product matrix of a 3-vector."""
    w = np.asarray(w, dtype=float)
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def vee(W) -> np.ndarray:
    """Inverse of :func:`skew`."""
    W = np.asarray(W, dtype=float)
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def hat(xi: Twist) -> np.ndarray:
    """4x4 matrix-algebra form of a twist: skew(w) block plus translation column."""
    M = np.zeros((4, 4))
    M[:3, :3] = skew(xi.angular)
    M[:3, 3] = xi.linear
    return M


def so3_exp(w) -> np.ndarray:
    """Rodrigues rotation for an axis-angle 3-vector."""
    w = np.asarray(w, dtype=float)
    theta = math.sqrt(float(w @ w))
    W = skew(w)
    if theta < SMALL_ANGLE:
        # second-order series; error O(theta^3) is below double precision here
        return np.eye(3) + W + 0.5 * (W @ W)
    a = math.sin(theta) / theta
    b = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + a * W + b * (W @ W)


def so3_log(R, strict: bool = True) -> np.ndarray:
    """Axis-angle vector w with so3_exp(w) == R.

    Uses atan2 of the antisymmetric part against the trace, which is well
    conditioned everywhere except the angle-pi branch cut. At the cut the
    strict mode raises :class:`DegenerateRotation`; with ``strict=False``
    the branch with non-negative leading axis component is returned.
    """
    R = np.asarray(R, dtype=float)
    axis_sin = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = float(np.linalg.norm(axis_sin))  # sin(theta)
    c = 0.5 * (float(np.trace(R)) - 1.0)  # cos(theta)
    theta = math.atan2(s, c)
    if theta < SMALL_ANGLE:
        return axis_sin  # w ~ sin-part for tiny angles
    if theta > math.pi - PI_MARGIN:
        if strict:
            raise DegenerateRotation(
                f"rotation angle {theta:.9f} is within {PI_MARGIN} of pi"
            )
        # near pi the axis comes from the symmetric part: R ~ 2nn^T - I
        nn = 0.5 * (R + np.eye(3))
        axis = np.sqrt(np.clip(np.diag(nn), 0.0, None))
        # fix relative signs from the off-diagonal entries
        k = int(np.argmax(axis))
        for i in range(3):
            if i != k and nn[k, i] < 0.0:
                axis[i] = -axis[i]
        axis /= np.linalg.norm(axis)
        for comp in axis:
            if abs(comp) > 1e-12:
                if comp < 0.0:
                    axis = -axis
                break
        return theta * axis
    return (theta / s) * axis_sin


def _left_jacobian(w) -> np.ndarray:
    """SO(3) left Jacobian; maps algebra translation to group translation."""
    w = np.asarray(w, dtype=float)
    theta = math.sqrt(float(w @ w))
    W = skew(w)
    if theta < SMALL_ANGLE:
        return np.eye(3) + 0.5 * W + (W @ W) / 6.0
    b = (1.0 - math.cos(theta)) / (theta * theta)
    c = (theta - math.sin(theta)) / (theta ** 3)
    return np.eye(3) + b * W + c * (W @ W)


def se3_exp(xi: Twist, dt: float) -> Pose:
    """Exponential of a twist scaled by dt: closed-form SE(3) motion."""
    if dt < 0.0:
        raise InvalidArgument("dt must be non-negative")
    w = xi.angular * dt
    v = xi.linear * dt
    R = so3_exp(w)
    p = _left_jacobian(w) @ v
    return Pose(R, p)


def step(T: Pose, xi: Twist, dt: float) -> Pose:
    """Advance a pose by a body-frame twist over dt (right composition)."""
    m = se3_exp(xi, dt)
    return Pose(T.rotation @ m.rotation, T.rotation @ m.position + T.position)


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.rotation @ b.rotation, a.rotation @ b.position + a.position)


def geodesic_distance(R1, R2) -> float:
    """Relative rotation angle: Frobenius norm of log(R1^T R2) over sqrt(2)."""
    w = so3_log(np.asarray(R1).T @ np.asarray(R2))
    # ||skew(w)||_F = sqrt(2)*||w||, so the normalized distance is just ||w||
    return float(np.linalg.norm(w))


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def euler_to_rot(e: EulerAngles) -> np.ndarray:
    """ZYX: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    for v in (e.yaw, e.pitch, e.roll):
        if not math.isfinite(v):
            raise InvalidArgument("Euler angles must be finite")
    return rot_z(e.yaw) @ rot_y(e.pitch) @ rot_x(e.roll)


def rot_to_euler(R) -> EulerAngles:
    """Inverse of :func:`euler_to_rot`; pitch normalized to [-pi/2, pi/2].

    At gimbal lock (|pitch| = pi/2) roll is fixed to zero and yaw absorbs
    the remaining rotation.
    """
    R = np.asarray(R, dtype=float)
    sp = -R[2, 0]
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    if abs(abs(sp) - 1.0) < 1e-9:
        # columns degenerate; only yaw -/+ roll is observable
        yaw = math.atan2(-R[0, 1], R[1, 1])
        return EulerAngles(yaw, pitch, 0.0)
    yaw = math.atan2(R[1, 0], R[0, 0])
    roll = math.atan2(R[2, 1], R[2, 2])
    return EulerAngles(yaw, pitch, roll)
