"""Corrosion detection stub and euclidean cluster extraction.

The color-threshold stub stands in for a learned detector; clustering
splits the detected points into spatially-distinct surfaces, one review
item each.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from star_repair.cloud import PointCloud
from star_repair.errors import MissingColors, NonPositiveRadius
from star_repair.geom import Point3
from star_repair import kernels

# Rust-hue threshold: a point is corroded iff r >= RUST_R_MIN and
# g <= RUST_G_MAX and b <= RUST_B_MAX.
RUST_R_MIN = 110
RUST_G_MAX = 95
RUST_B_MAX = 90

DEFAULT_CLUSTER_RADIUS = 0.05
DEFAULT_MIN_CLUSTER_SIZE = 30


@dataclass(frozen=True, eq=False)
class CorrosionMask:
    """Indices into a source cloud judged corroded (sorted, unique)."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CorrosionMask):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)


@dataclass(frozen=True)
class Cluster:
    """One spatially-connected detected surface."""

    id: int
    cloud: PointCloud
    centroid: Point3

    def __post_init__(self):
        if len(self.cloud) == 0:
            raise ValueError("cluster cloud must be non-empty")


@dataclass(frozen=True)
class DetectionEvent:
    """A cluster ready for review, with its scene snapshot reference."""

    cluster: Cluster
    snapshot: str
    timestamp: float


def detect_corrosion_stub(cloud: PointCloud) -> CorrosionMask:
    """Threshold detector: rust-colored points are flagged as corroded."""
    if cloud.colors is None:
        raise MissingColors("corrosion detection needs per-point colors")
    c = cloud.colors
    hit = (c[:, 0] >= RUST_R_MIN) & (c[:, 1] <= RUST_G_MAX) & (c[:, 2] <= RUST_B_MAX)
    return CorrosionMask(np.flatnonzero(hit))


def make_cluster(cluster_id: int, cloud: PointCloud) -> Cluster:
    centroid = cloud.points.mean(axis=0)
    return Cluster(cluster_id, cloud, Point3(*map(float, centroid)))


def detect_events(
    cloud: PointCloud,
    snapshot: str,
    timestamp: float,
    radius: float = DEFAULT_CLUSTER_RADIUS,
    min_size: int = DEFAULT_MIN_CLUSTER_SIZE,
) -> list[DetectionEvent]:
    """Full detection pass: one event per actionable corroded cluster."""
    mask = detect_corrosion_stub(cloud)
    clusters = euclidean_cluster(cloud.select(mask.indices), radius, min_size)
    return [DetectionEvent(c, snapshot, timestamp) for c in clusters]


def euclidean_cluster(
    cloud: PointCloud,
    radius: float = DEFAULT_CLUSTER_RADIUS,
    min_size: int = DEFAULT_MIN_CLUSTER_SIZE,
) -> list[Cluster]:
    """Split a cloud into connected components of the within-`radius` graph.

    Components smaller than min_size are discarded. Clusters are ordered by
    descending size, ties by smallest member index, and get ids 0, 1, ...
    in that order.
    """
    if not radius > 0:
        raise NonPositiveRadius(f"radius must be > 0, got {radius}")
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    if len(cloud) == 0:
        return []
    labels = kernels.cluster_labels(cloud.points, radius)
    groups: dict[int, np.ndarray] = {}
    for label in np.unique(labels):
        groups[int(label)] = np.flatnonzero(labels == label)
    kept = [idx for idx in groups.values() if idx.size >= min_size]
    kept.sort(key=lambda idx: (-idx.size, int(idx[0])))
    return [make_cluster(i, cloud.select(idx)) for i, idx in enumerate(kept)]
