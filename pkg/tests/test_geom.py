import math

import pytest

from star_repair.geom import (
    Point3,
    Pose,
    UnitQuaternion,
    compose,
    inverse,
    inverse_transform_point,
    transform_point,
)
from conftest import random_point, random_pose, random_unit_quaternion

TOL = 1e-9


def dist(a: Point3, b: Point3) -> float:
    return (a - b).norm()


def test_transform_identity():
    p = transform_point(Pose.identity(), Point3(1, 2, 3))
    assert p == Point3(1, 2, 3)


def test_transform_pure_translation():
    pose = Pose(Point3(1, 0, 0), UnitQuaternion.identity())
    assert transform_point(pose, Point3(0, 0, 0)) == Point3(1, 0, 0)


def test_transform_quarter_turn_about_z():
    pose = Pose(Point3(0, 0, 0), UnitQuaternion.from_axis_angle(Point3(0, 0, 1), math.pi / 2))
    p = transform_point(pose, Point3(1, 0, 0))
    assert dist(p, Point3(0, 1, 0)) < TOL


def test_inverse_transform_identity():
    assert inverse_transform_point(Pose.identity(), Point3(4, 5, 6)) == Point3(4, 5, 6)


def test_inverse_transform_pure_translation():
    pose = Pose(Point3(1, 0, 0), UnitQuaternion.identity())
    assert inverse_transform_point(pose, Point3(1, 0, 0)) == Point3(0, 0, 0)


def test_round_trip_identity_1000_random(rng):
    for _ in range(1000):
        pose = random_pose(rng)
        p = random_point(rng)
        q = inverse_transform_point(pose, transform_point(pose, p))
        assert dist(q, p) < TOL


def test_compose_identity_element(rng):
    t = random_pose(rng)
    left = compose(Pose.identity(), t)
    assert dist(left.position, t.position) < TOL
    assert left.orientation.approx_equal(t.orientation)


def test_compose_with_inverse_is_identity(rng):
    for _ in range(100):
        t = random_pose(rng)
        e = compose(t, inverse(t))
        assert e.position.norm() < TOL
        assert e.orientation.approx_equal(UnitQuaternion.identity())


def test_compose_equals_sequential_application(rng):
    for _ in range(200):
        a, b = random_pose(rng), random_pose(rng)
        p = random_point(rng)
        lhs = transform_point(compose(a, b), p)
        rhs = transform_point(a, transform_point(b, p))
        assert dist(lhs, rhs) < TOL


def test_compose_associative(rng):
    for _ in range(100):
        a, b, c = random_pose(rng), random_pose(rng), random_pose(rng)
        p = random_point(rng)
        lhs = transform_point(compose(compose(a, b), c), p)
        rhs = transform_point(compose(a, compose(b, c)), p)
        assert dist(lhs, rhs) < TOL


def test_quaternion_norm_preserved_under_composition(rng):
    q = random_unit_quaternion(rng)
    for _ in range(500):
        q = q.multiply(random_unit_quaternion(rng))
        assert abs(q.norm() - 1.0) < TOL
        assert abs(q.conjugate().norm() - 1.0) < TOL


def test_rotation_preserves_distances(rng):
    for _ in range(200):
        q = random_unit_quaternion(rng)
        p1, p2 = random_point(rng), random_point(rng)
        assert abs(dist(q.rotate(p1), q.rotate(p2)) - dist(p1, p2)) < TOL


def test_rotation_matrix_round_trip(rng):
    for _ in range(200):
        q = random_unit_quaternion(rng)
        q2 = UnitQuaternion.from_rotation_matrix(q.rotation_matrix())
        assert q2.approx_equal(q)


def test_non_finite_point_rejected():
    with pytest.raises(ValueError):
        Point3(float("nan"), 0, 0)
    with pytest.raises(ValueError):
        Point3(0, float("inf"), 0)


def test_zero_quaternion_rejected():
    with pytest.raises(ValueError):
        UnitQuaternion(0, 0, 0, 0)


def test_quaternion_constructor_normalizes():
    q = UnitQuaternion(2, 0, 0, 0)
    assert q.w == 1.0 and abs(q.norm() - 1.0) < 1e-15
