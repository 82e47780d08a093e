"""Reviewer-authored exclusion volumes and inlier extraction.

A volume is a posed box / cylinder / sphere; points inside any volume of a
set are carved out of a cluster's cloud before re-planning. Boundaries are
inclusive: a point on the surface is removed, so ties resolve toward
protecting equipment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from star_repair.cloud import PointCloud
from star_repair.geom import Point3, Pose, inverse_transform_point
from star_repair import kernels


class Shape(enum.Enum):
    BOX = "box"
    CYLINDER = "cylinder"
    SPHERE = "sphere"


_DIMS_LEN = {Shape.BOX: 3, Shape.CYLINDER: 2, Shape.SPHERE: 1}
_SHAPE_CODE = {
    Shape.BOX: kernels.SHAPE_BOX,
    Shape.CYLINDER: kernels.SHAPE_CYLINDER,
    Shape.SPHERE: kernels.SHAPE_SPHERE,
}


@dataclass(frozen=True)
class ExclusionVolume:
    """A posed primitive; dims are full extents for boxes, (radius, height)
    for cylinders (axis = local z), and (radius,) for spheres."""

    shape: Shape
    pose: Pose
    dims: tuple[float, ...]

    def __post_init__(self):
        expected = _DIMS_LEN[self.shape]
        if len(self.dims) != expected:
            raise ValueError(
                f"{self.shape.value} takes {expected} dims, got {len(self.dims)}"
            )
        if any(not d > 0 for d in self.dims):
            raise ValueError(f"dims must be positive, got {self.dims}")
        object.__setattr__(self, "dims", tuple(float(d) for d in self.dims))


@dataclass(frozen=True)
class ExclusionSet:
    """All volumes a reviewer placed against one cluster (may be empty)."""

    cluster_id: int
    volumes: tuple[ExclusionVolume, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "volumes", tuple(self.volumes))


def contains(volume: ExclusionVolume, p: Point3) -> bool:
    """Closed-boundary containment test for one point."""
    local = inverse_transform_point(volume.pose, p)
    if volume.shape is Shape.BOX:
        sx, sy, sz = volume.dims
        return (
            abs(local.x) <= sx * 0.5
            and abs(local.y) <= sy * 0.5
            and abs(local.z) <= sz * 0.5
        )
    if volume.shape is Shape.CYLINDER:
        r, h = volume.dims
        return local.x * local.x + local.y * local.y <= r * r and abs(local.z) <= h * 0.5
    r = volume.dims[0]
    return local.x * local.x + local.y * local.y + local.z * local.z <= r * r


def containment_mask(volume: ExclusionVolume, points: np.ndarray) -> np.ndarray:
    """Vectorized contains() over an (n, 3) array."""
    q = volume.pose.orientation
    t = volume.pose.position
    dims = np.zeros(3, dtype=np.float64)
    dims[: len(volume.dims)] = volume.dims
    return kernels.contain_mask(
        np.ascontiguousarray(points, dtype=np.float64),
        _SHAPE_CODE[volume.shape],
        dims,
        np.array([q.w, q.x, q.y, q.z], dtype=np.float64),
        np.array([t.x, t.y, t.z], dtype=np.float64),
    )


def apply_exclusions(
    cloud: PointCloud, exclusions: ExclusionSet
) -> tuple[PointCloud, PointCloud]:
    """Split a cloud into (retained, removed) around the exclusion set.

    removed holds every point inside at least one volume; input order is
    preserved within both outputs and together they partition the input.
    """
    removed = np.zeros(len(cloud), dtype=bool)
    for volume in exclusions.volumes:
        removed |= containment_mask(volume, cloud.points)
    keep_idx = np.flatnonzero(~removed)
    drop_idx = np.flatnonzero(removed)
    return cloud.select(keep_idx), cloud.select(drop_idx)
