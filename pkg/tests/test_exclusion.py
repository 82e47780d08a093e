import math

import numpy as np
import pytest

from star_repair.cloud import PointCloud
from star_repair.exclusion import (
    ExclusionSet,
    ExclusionVolume,
    Shape,
    apply_exclusions,
    containment_mask,
    contains,
)
from star_repair.geom import Point3, Pose, UnitQuaternion, compose, transform_point
from conftest import random_pose


# --- independent oracle: rotation-matrix formula, distinct from the
#     quaternion cross-product path used by the implementation ---

def oracle_local_point(volume: ExclusionVolume, p) -> np.ndarray:
    if isinstance(p, Point3):
        p = p.as_tuple()
    q = volume.pose.orientation
    w, x, y, z = q.w, q.x, q.y, q.z
    R = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
    t = np.array(volume.pose.position.as_tuple())
    return R.T @ (np.asarray(p) - t)


def oracle_contains_and_margin(volume: ExclusionVolume, p) -> tuple[bool, float]:
    """(inside, margin): margin is the linear distance to the nearest deciding
    boundary, negative outside."""
    l = oracle_local_point(volume, p)
    if volume.shape is Shape.BOX:
        sx, sy, sz = volume.dims
        margins = [sx / 2 - abs(l[0]), sy / 2 - abs(l[1]), sz / 2 - abs(l[2])]
        return min(margins) >= 0, min(margins)
    if volume.shape is Shape.CYLINDER:
        r, h = volume.dims
        margins = [r - math.hypot(l[0], l[1]), h / 2 - abs(l[2])]
        return min(margins) >= 0, min(margins)
    r = volume.dims[0]
    m = r - float(np.linalg.norm(l))
    return m >= 0, m


def random_volume(rng) -> ExclusionVolume:
    shape = [Shape.BOX, Shape.CYLINDER, Shape.SPHERE][int(rng.integers(3))]
    dims = {
        Shape.BOX: tuple(rng.uniform(0.1, 1.5, 3)),
        Shape.CYLINDER: tuple(rng.uniform(0.1, 1.0, 2)),
        Shape.SPHERE: (float(rng.uniform(0.1, 1.0)),),
    }[shape]
    return ExclusionVolume(shape, random_pose(rng), dims)


def test_unit_box_contains_center():
    v = ExclusionVolume(Shape.BOX, Pose.identity(), (1, 1, 1))
    assert contains(v, Point3(0, 0, 0))


def test_sphere_boundary_is_closed():
    v = ExclusionVolume(Shape.SPHERE, Pose.identity(), (1.0,))
    assert contains(v, Point3(1, 0, 0))


def test_rotated_box_excludes_diagonal_point():
    # box rotated 45 deg about z: (0.6, 0.6, 0) maps to local x = 0.6*sqrt(2)
    # ~ 0.8485 > 0.5, so the point is outside
    pose = Pose(Point3(0, 0, 0), UnitQuaternion.from_axis_angle(Point3(0, 0, 1), math.pi / 4))
    v = ExclusionVolume(Shape.BOX, pose, (1, 1, 1))
    assert not contains(v, Point3(0.6, 0.6, 0))
    l = oracle_local_point(v, (0.6, 0.6, 0))
    assert abs(abs(l[0]) - 0.6 * math.sqrt(2)) < 1e-9


def test_box_boundary_inclusive():
    v = ExclusionVolume(Shape.BOX, Pose.identity(), (1, 2, 3))
    assert contains(v, Point3(0.5, 1.0, 1.5))
    assert not contains(v, Point3(0.5 + 1e-9, 0, 0))


def test_cylinder_axis_is_local_z():
    v = ExclusionVolume(Shape.CYLINDER, Pose.identity(), (0.5, 2.0))
    assert contains(v, Point3(0, 0, 1.0))
    assert not contains(v, Point3(0, 0, 1.0 + 1e-9))
    assert contains(v, Point3(0.5, 0, 0))
    assert not contains(v, Point3(0.51, 0, 0))


def test_contains_matches_oracle_random(rng):
    mismatches = 0
    for _ in range(2000):
        v = random_volume(rng)
        p = Point3(*rng.uniform(-2, 2, 3))
        got = contains(v, p)
        want, margin = oracle_contains_and_margin(v, p)
        if got != want:
            assert abs(margin) <= 1e-9, (v, p, margin)
            mismatches += 1
    assert mismatches == 0


def test_batch_mask_matches_scalar_contains(rng):
    for _ in range(20):
        v = random_volume(rng)
        pts = rng.uniform(-2, 2, (200, 3))
        mask = containment_mask(v, pts)
        for i, p in enumerate(pts):
            assert mask[i] == contains(v, Point3(*p))


def test_apply_empty_set_is_noop(rng):
    cloud = PointCloud(rng.uniform(-1, 1, (50, 3)))
    retained, removed = apply_exclusions(cloud, ExclusionSet(cluster_id=0))
    assert retained.equals(cloud)
    assert len(removed) == 0


def test_apply_total_cover(rng):
    cloud = PointCloud(rng.uniform(-0.5, 0.5, (50, 3)))
    big = ExclusionVolume(Shape.SPHERE, Pose.identity(), (10.0,))
    retained, removed = apply_exclusions(cloud, ExclusionSet(0, (big,)))
    assert len(retained) == 0
    assert removed.equals(cloud)


def test_apply_matches_brute_force_oracle(rng):
    pts = rng.uniform(-2, 2, (500, 3))
    cloud = PointCloud(pts)
    volumes = tuple(random_volume(rng) for _ in range(3))
    retained, removed = apply_exclusions(cloud, ExclusionSet(0, volumes))
    removed_set = {tuple(p) for p in removed.points.tolist()}
    for p in pts:
        inside = any(oracle_contains_and_margin(v, p)[0] for v in volumes)
        margin = min(abs(oracle_contains_and_margin(v, p)[1]) for v in volumes)
        if margin > 1e-9:
            assert (tuple(p) in removed_set) == inside


def test_partition_property(rng):
    for _ in range(20):
        pts = rng.uniform(-2, 2, (100, 3))
        cloud = PointCloud(pts, rng.integers(0, 256, (100, 3)))
        volumes = tuple(random_volume(rng) for _ in range(int(rng.integers(0, 4))))
        retained, removed = apply_exclusions(cloud, ExclusionSet(0, volumes))
        assert len(retained) + len(removed) == len(cloud)
        merged = sorted(map(tuple, retained.points.tolist() + removed.points.tolist()))
        assert merged == sorted(map(tuple, pts.tolist()))


def test_monotonicity_adding_volume_never_grows_retained(rng):
    pts = rng.uniform(-2, 2, (200, 3))
    cloud = PointCloud(pts)
    volumes: list[ExclusionVolume] = []
    prev = len(cloud)
    for _ in range(5):
        volumes.append(random_volume(rng))
        retained, _ = apply_exclusions(cloud, ExclusionSet(0, tuple(volumes)))
        assert len(retained) <= prev
        prev = len(retained)


def test_order_independence(rng):
    pts = rng.uniform(-2, 2, (150, 3))
    cloud = PointCloud(pts)
    volumes = [random_volume(rng) for _ in range(4)]
    a, _ = apply_exclusions(cloud, ExclusionSet(0, tuple(volumes)))
    b, _ = apply_exclusions(cloud, ExclusionSet(0, tuple(reversed(volumes))))
    assert a.equals(b)


def test_pose_invariance(rng):
    pts = rng.uniform(-1, 1, (200, 3))
    cloud = PointCloud(pts)
    volumes = [random_volume(rng) for _ in range(3)]
    rigid = random_pose(rng)
    moved_pts = np.array([transform_point(rigid, Point3(*p)).as_tuple() for p in pts])
    moved_vols = [
        ExclusionVolume(v.shape, compose(rigid, v.pose), v.dims) for v in volumes
    ]
    base_removed = np.zeros(len(pts), dtype=bool)
    for v in volumes:
        base_removed |= containment_mask(v, pts)
    moved_removed = np.zeros(len(pts), dtype=bool)
    for v in moved_vols:
        moved_removed |= containment_mask(v, moved_pts)
    # skip boundary-grazing points
    for i, p in enumerate(pts):
        margin = min(abs(oracle_contains_and_margin(v, p)[1]) for v in volumes)
        if margin > 1e-7:
            assert base_removed[i] == moved_removed[i]


def test_invalid_dims_rejected():
    with pytest.raises(ValueError):
        ExclusionVolume(Shape.BOX, Pose.identity(), (-1, 1, 1))
    with pytest.raises(ValueError):
        ExclusionVolume(Shape.SPHERE, Pose.identity(), (0.0,))
    with pytest.raises(ValueError):
        ExclusionVolume(Shape.CYLINDER, Pose.identity(), (1.0,))
