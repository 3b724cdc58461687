import math

import numpy as np
import pytest
import scipy.linalg

from swarmplan.errors import DegenerateRotation, InvalidArgument
from swarmplan.liegroup import (EulerAngles, Pose, Twist, euler_to_rot,
                                geodesic_distance, hat, is_rotation,
                                rot_to_euler, rot_x, rot_y, rot_z, se3_exp,
                                so3_exp, so3_log, step)


def test_hat_zero_twist():
    assert np.array_equal(hat(Twist.zero()), np.zeros((4, 4)))


def test_hat_unit_z():
    m = hat(Twist(np.zeros(3), np.array([0.0, 0.0, 1.0])))
    expected = np.zeros((4, 4))
    expected[0, 1] = -1.0
    expected[1, 0] = 1.0
    assert np.array_equal(m, expected)


def test_hat_general_placement():
    m = hat(Twist(np.array([4.0, 5.0, 6.0]), np.array([1.0, 2.0, 3.0])))
    skew = m[:3, :3]
    assert np.array_equal(skew, -skew.T)
    assert skew[2, 1] == 1.0 and skew[1, 2] == -1.0
    assert skew[0, 2] == 2.0 and skew[2, 0] == -2.0
    assert skew[1, 0] == 3.0 and skew[0, 1] == -3.0
    assert np.array_equal(m[:3, 3], [4.0, 5.0, 6.0])
    assert np.array_equal(m[3], np.zeros(4))


def test_hat_rejects_nonfinite():
    with pytest.raises(InvalidArgument):
        hat(Twist(np.array([np.nan, 0, 0]), np.zeros(3)))


def test_exp_zero_is_identity():
    p = se3_exp(Twist.zero(), 2.5)
    assert np.array_equal(p.rotation, np.eye(3))
    assert np.array_equal(p.position, np.zeros(3))


def test_exp_pure_translation():
    p = se3_exp(Twist(np.array([1.0, 0, 0]), np.zeros(3)), 0.5)
    assert np.allclose(p.rotation, np.eye(3))
    assert np.allclose(p.position, [0.5, 0, 0])


def test_exp_pure_rotation_quarter_turn():
    p = se3_exp(Twist(np.zeros(3), np.array([0, 0, math.pi / 2])), 1.0)
    expected = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    assert np.allclose(p.rotation, expected, atol=1e-12)
    assert np.allclose(p.position, 0.0)


def test_exp_matches_matrix_exponential():
    rng = np.random.default_rng(7)
    for _ in range(50):
        xi = Twist(rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3))
        dt = rng.uniform(0.0, 1.2)
        ours = se3_exp(xi, dt).matrix()
        ref = np.real(scipy.linalg.expm(hat(xi) * dt))
        assert np.allclose(ours, ref, atol=1e-10)


def test_exp_rejects_negative_dt():
    with pytest.raises(InvalidArgument):
        se3_exp(Twist.zero(), -0.1)


def test_step_identity():
    t = step(Pose.identity(), Twist.zero(), 1.0)
    assert np.array_equal(t.position, np.zeros(3))


def test_step_translation():
    t = step(Pose.identity(), Twist(np.array([1.0, 0, 0]), np.zeros(3)), 1.0)
    assert np.allclose(t.position, [1, 0, 0])


def test_step_body_frame_velocity():
    start = Pose(rot_z(math.pi / 2), np.zeros(3))
    t = step(start, Twist(np.array([1.0, 0, 0]), np.zeros(3)), 1.0)
    # body x heads along world y after the quarter turn
    assert np.allclose(t.position, [0, 1, 0], atol=1e-12)


def test_step_composition_associativity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        pose = Pose(so3_exp(rng.uniform(-1, 1, 3)), rng.uniform(-2, 2, 3))
        xi = Twist(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
        a, b = rng.uniform(0, 0.8, 2)
        whole = step(pose, xi, a + b)
        split = step(step(pose, xi, a), xi, b)
        assert np.allclose(whole.matrix(), split.matrix(), atol=1e-9)


def test_log_identity():
    assert np.allclose(so3_log(np.eye(3)), np.zeros(3))


def test_log_closed_forms():
    assert np.allclose(so3_log(rot_z(0.3)), [0, 0, 0.3], atol=1e-12)
    assert np.allclose(so3_log(rot_x(1.0)), [1, 0, 0], atol=1e-12)


def test_log_raises_at_pi():
    with pytest.raises(DegenerateRotation):
        so3_log(rot_z(math.pi))


def test_log_pi_branch_convention():
    w = so3_log(rot_z(math.pi), strict=False)
    assert np.allclose(w, [0, 0, math.pi], atol=1e-9)
    w = so3_log(rot_x(math.pi), strict=False)
    assert w[0] > 0  # leading component non-negative
    assert np.allclose(so3_exp(w), rot_x(math.pi), atol=1e-9)


def test_exp_log_roundtrip_random():
    rng = np.random.default_rng(11)
    for _ in range(500):
        w = rng.uniform(-1, 1, 3)
        n = np.linalg.norm(w)
        if n > 0:
            w = w / n * rng.uniform(0, math.pi - 0.01)
        back = so3_log(so3_exp(w))
        assert np.allclose(back, w, atol=1e-9)


def test_operations_preserve_orthonormality():
    rng = np.random.default_rng(5)
    pose = Pose.identity()
    xi = Twist(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
    for _ in range(200):
        pose = step(pose, xi, 0.05)
    assert is_rotation(pose.rotation, tol=1e-9)


def test_geodesic_distance_basics():
    r = so3_exp(np.array([0.3, -0.2, 0.9]))
    assert geodesic_distance(r, r) == 0.0
    assert math.isclose(geodesic_distance(np.eye(3), rot_z(math.pi / 2)),
                        math.pi / 2, abs_tol=1e-12)
    assert math.isclose(geodesic_distance(rot_z(0.2), rot_z(0.5)), 0.3,
                        abs_tol=1e-12)


def test_geodesic_distance_symmetric_and_bounded():
    rng = np.random.default_rng(2)
    for _ in range(50):
        r1 = so3_exp(rng.uniform(-1.5, 1.5, 3))
        r2 = so3_exp(rng.uniform(-1.5, 1.5, 3))
        d12 = geodesic_distance(r1, r2)
        d21 = geodesic_distance(r2, r1)
        assert math.isclose(d12, d21, abs_tol=1e-12)
        assert 0.0 <= d12 <= math.pi


def test_geodesic_matches_frobenius_definition():
    rng = np.random.default_rng(9)
    for _ in range(25):
        r1 = so3_exp(rng.uniform(-1.2, 1.2, 3))
        r2 = so3_exp(rng.uniform(-1.2, 1.2, 3))
        ref = np.linalg.norm(np.real(scipy.linalg.logm(r1.T @ r2)), "fro")
        ref /= math.sqrt(2.0)
        assert math.isclose(geodesic_distance(r1, r2), ref, abs_tol=1e-9)


def test_euler_identity():
    assert np.allclose(euler_to_rot(EulerAngles(0, 0, 0)), np.eye(3))


def test_euler_yaw_only():
    assert np.allclose(euler_to_rot(EulerAngles(math.pi / 2, 0, 0)),
                       rot_z(math.pi / 2), atol=1e-12)


def test_euler_zyx_product_order():
    # independent expansion of the ZYX product
    y, p, r = 0.7, -0.4, 1.1
    ref = rot_z(y) @ rot_y(p) @ rot_x(r)
    assert np.allclose(euler_to_rot(EulerAngles(y, p, r)), ref, atol=1e-12)


def test_euler_roundtrip_random():
    rng = np.random.default_rng(21)
    for _ in range(300):
        e = EulerAngles(rng.uniform(-math.pi, math.pi),
                        rng.uniform(-1.4, 1.4),
                        rng.uniform(-math.pi, math.pi))
        back = rot_to_euler(euler_to_rot(e))
        assert math.isclose(back.yaw, e.yaw, abs_tol=1e-9)
        assert math.isclose(back.pitch, e.pitch, abs_tol=1e-9)
        assert math.isclose(back.roll, e.roll, abs_tol=1e-9)


def test_euler_gimbal_lock_convention():
    r = euler_to_rot(EulerAngles(0.4, math.pi / 2, 0.3))
    e = rot_to_euler(r)
    assert e.roll == 0.0
    assert math.isclose(e.pitch, math.pi / 2, abs_tol=1e-9)
    # yaw absorbs the remainder; the matrix itself round-trips
    assert np.allclose(euler_to_rot(e), r, atol=1e-9)
