import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wheelodom.errors import ParseError, ValidationError
from wheelodom.odometry import Trajectory
from wheelodom.transform import (
    VEHICLE_TO_UGV,
    RigidTransform3D,
    VehicleToUgvConstants,
    apply,
    compose,
    invert,
    load_transform_config,
    transform_trajectory,
)

IDENTITY = RigidTransform3D.identity()


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_transform(seed):
    rng = np.random.default_rng(seed)
    return RigidTransform3D(random_rotation(rng), rng.uniform(-5, 5, 3))


vec = st.tuples(*[st.floats(-100, 100)] * 3)


@given(vec)
def test_identity(p):
    assert apply(IDENTITY, p).tolist() == list(p)


def test_vehicle_to_ugv_origin():
    assert apply(VEHICLE_TO_UGV, (0.0, 0.0, 0.0)).tolist() == [0.0, -1.21, -0.59]


def test_vehicle_to_ugv_point():
    np.testing.assert_allclose(apply(VEHICLE_TO_UGV, (1.0, 2.0, 3.0)), [1.0, 0.79, 2.41], atol=1e-15)


def test_vehicle_to_ugv_rotation_is_exact_identity():
    assert np.array_equal(VEHICLE_TO_UGV.rotation, np.eye(3))
    assert VehicleToUgvConstants() == VehicleToUgvConstants(1.21, 0.59)


def test_invert_examples():
    inv = invert(IDENTITY)
    assert np.array_equal(inv.rotation, np.eye(3)) and np.all(inv.translation == 0)
    np.testing.assert_array_equal(invert(VEHICLE_TO_UGV).translation, [0.0, 1.21, 0.59])


@pytest.mark.parametrize("seed", range(5))
def test_compose_with_inverse_is_identity(seed):
    t = random_transform(seed)
    c = compose(t, invert(t))
    np.testing.assert_allclose(c.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(c.translation, 0.0, atol=1e-12)
    c = compose(invert(t), t)
    np.testing.assert_allclose(c.rotation, np.eye(3), atol=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 10_000), vec, vec)
def test_distance_preserved(seed, p, q):
    t = random_transform(seed)
    d0 = np.linalg.norm(np.subtract(p, q))
    d1 = np.linalg.norm(apply(t, p) - apply(t, q))
    assert abs(d1 - d0) <= 1e-12 * max(1.0, d0)


@settings(max_examples=50)
@given(st.integers(0, 10_000), vec)
def test_invert_apply_round_trip(seed, p):
    t = random_transform(seed)
    np.testing.assert_allclose(apply(invert(t), apply(t, p)), p, atol=1e-12 * max(1.0, np.abs(p).max()))


@given(st.integers(0, 10_000), vec)
def test_compose_matches_sequential_apply(seed, p):
    a, b = random_transform(seed), random_transform(seed + 1)
    np.testing.assert_allclose(apply(compose(a, b), p), apply(a, apply(b, p)), atol=1e-11)


@pytest.mark.parametrize("seed", range(5))
def test_associative(seed):
    a, b, c = (random_transform(seed * 3 + k) for k in range(3))
    left, right = compose(compose(a, b), c), compose(a, compose(b, c))
    np.testing.assert_allclose(left.rotation, right.rotation, atol=1e-12)
    np.testing.assert_allclose(left.translation, right.translation, atol=1e-12)


@pytest.mark.parametrize("rotation", [
    np.diag([1.0, 1.0, -1.0]),
    2 * np.eye(3),
    [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
])
def test_rejects_non_rotations(rotation):
    with pytest.raises(ValidationError):
        RigidTransform3D(rotation, np.zeros(3))


def test_matmul_operator():
    t = random_transform(9)
    assert np.allclose(t @ np.ones(3), apply(t, np.ones(3)))
    assert np.allclose((t @ invert(t)).rotation, np.eye(3))


def planar(poses):
    return Trajectory(np.arange(len(poses)), poses)


def test_transform_trajectory_identity():
    traj = planar([[0, 0, 0], [1, 2, 0.5]])
    out = transform_trajectory(traj, IDENTITY)
    assert np.array_equal(out.points[:, :2], traj.positions)
    assert np.all(out.points[:, 2] == 0)
    assert np.array_equal(out.heading, traj.poses[:, 2])


def test_transform_trajectory_vehicle_to_ugv():
    traj = planar([[0, 0, 0], [3, 1, 0.2], [4, -1, 0.1]])
    out = transform_trajectory(traj, VEHICLE_TO_UGV)
    assert np.all(out.points[:, 2] == -0.59)
    np.testing.assert_allclose(out.points[:, 1], traj.positions[:, 1] - 1.21)
    assert np.array_equal(out.points[:, 0], traj.positions[:, 0])


def test_transform_trajectory_yaw():
    out = transform_trajectory(planar([[1, 0, 0]]), RigidTransform3D.from_yaw(math.pi / 2))
    np.testing.assert_allclose(out.points[0], [0, 1, 0], atol=1e-15)
    assert out.heading[0] == pytest.approx(math.pi / 2)


def test_transform_trajectory_tilted_drops_heading():
    roll = RigidTransform3D([[1, 0, 0], [0, 0, -1], [0, 1, 0]], np.zeros(3))
    with pytest.warns(UserWarning, match="heading"):
        out = transform_trajectory(planar([[1, 1, 0]]), roll)
    assert out.heading is None


def test_load_config_offsets(tmp_path):
    p = tmp_path / "t.cfg"
    p.write_text("# offsets\nl0 = 1.5\nh0: 0.25\n")
    t = load_transform_config(p)
    assert apply(t, (0, 0, 0)).tolist() == [0.0, -1.5, -0.25]


def test_load_config_full(tmp_path):
    p = tmp_path / "t.cfg"
    p.write_text("rotation = 0 -1 0, 1 0 0, 0 0 1\ntranslation = 1, 2, 3\n")
    t = load_transform_config(p)
    np.testing.assert_allclose(apply(t, (1, 0, 0)), [1, 3, 3], atol=1e-15)


def test_load_config_defaults(tmp_path):
    p = tmp_path / "t.cfg"
    p.write_text("\n")
    assert apply(load_transform_config(p), (0, 0, 0)).tolist() == [0.0, -1.21, -0.59]


@pytest.mark.parametrize("text", ["rotation = 1 0 0\n", "l0 = abc\n", "just words\n"])
def test_load_config_errors(tmp_path, text):
    p = tmp_path / "t.cfg"
    p.write_text(text)
    with pytest.raises(ParseError):
        load_transform_config(p)
