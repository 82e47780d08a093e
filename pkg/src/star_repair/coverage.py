"""Surface coverage planning.

Pipeline per cluster: estimate per-point normals, sample the surface at the
target spacing, hover one virtual fixture per sample offset along the
normal, then evaluate each fixture against an arm reachability model. The
whole plan is re-derived from scratch after the reviewer carves out
exclusion volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from star_repair.cloud import PointCloud, voxel_downsample
from star_repair.detection import Cluster
from star_repair.errors import (
    ClusterMismatch,
    DegenerateNeighborhood,
    EmptyAfterExclusion,
    TooFewPoints,
)
from star_repair.exclusion import ExclusionSet, apply_exclusions
from star_repair.geom import Point3, Pose, UnitQuaternion

MIN_PLAN_POINTS = 3

DEFAULT_OFFSET = 0.15
DEFAULT_SPACING = 0.05
DEFAULT_K = 15
DEFAULT_ROLL_CANDIDATES = 8


@dataclass(frozen=True, eq=False)
class SurfaceNormals:
    """Unit normals parallel to a cloud's points, oriented toward `viewpoint`."""

    normals: np.ndarray
    viewpoint: Point3

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.normals, dtype=np.float64))
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"normals must be (n, 3), got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "normals", arr)

    def __eq__(self, other):
        if not isinstance(other, SurfaceNormals):
            return NotImplemented
        return (
            np.array_equal(self.normals, other.normals)
            and self.viewpoint == other.viewpoint
        )


@dataclass(frozen=True)
class VirtualFixture:
    """End-effector target hovering over one surface sample.

    The pose's local -z axis points along -normal, i.e. at the surface;
    `source` is the sample the fixture covers.
    """

    pose: Pose
    source: Point3
    reachable: bool = True

    def approach_axis(self) -> Point3:
        """World direction of the tool axis (local -z)."""
        return self.pose.orientation.rotate(Point3(0.0, 0.0, -1.0))


@dataclass(frozen=True)
class RepairPlan:
    """Ordered virtual fixtures plus coverage metrics for one cluster."""

    cluster_id: int
    fixtures: tuple[VirtualFixture, ...]
    spacing: float
    offset: float
    coverage_fraction: float

    @property
    def reachable_count(self) -> int:
        return sum(1 for f in self.fixtures if f.reachable)


@dataclass(frozen=True)
class ReachabilityModel:
    """Spherical-shell + approach-cone proxy for arm reach.

    A fixture is attainable when its distance from `shoulder` lies in
    [r_min, r_max] and the approach axis deviates from the shoulder->fixture
    ray by at most cone_half_angle. Defaults are UR5-scale.
    """

    shoulder: Point3 = field(default_factory=lambda: Point3(0.0, 0.0, 0.0))
    r_min: float = 0.2
    r_max: float = 1.0
    cone_half_angle: float = 1.2

    def __post_init__(self):
        if not (0 <= self.r_min < self.r_max):
            raise ValueError(f"need 0 <= r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if not (0 <= self.cone_half_angle <= math.pi):
            raise ValueError(f"cone_half_angle must lie in [0, pi], got {self.cone_half_angle}")


def unconstrained_reach() -> ReachabilityModel:
    """A model that admits every fixture (used when no arm model is configured)."""
    return ReachabilityModel(Point3(0.0, 0.0, 0.0), 0.0, math.inf, math.pi)


@dataclass(frozen=True)
class PlannerParams:
    """Coverage-planner knobs; every value is config-overridable."""

    offset: float = DEFAULT_OFFSET
    spacing: float = DEFAULT_SPACING
    k: int = DEFAULT_K
    roll_candidates: int = DEFAULT_ROLL_CANDIDATES
    reach: Optional[ReachabilityModel] = None
    viewpoint: Point3 = field(default_factory=lambda: Point3(0.0, 0.0, 0.0))


def estimate_normals(cloud: PointCloud, k: int, viewpoint: Point3) -> SurfaceNormals:
    """Per-point PCA normals over the k nearest neighbors.

    Each normal is the smallest-eigenvalue eigenvector of the neighborhood
    covariance, sign-flipped so it faces the viewpoint. Raises TooFewPoints
    for clouds under 3 points and DegenerateNeighborhood when a neighborhood
    has rank < 2 (collinear or coincident points).
    """
    n = len(cloud)
    if n < MIN_PLAN_POINTS:
        raise TooFewPoints(f"normal estimation needs >= 3 points, got {n}")
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    k_eff = min(k, n)
    tree = cKDTree(cloud.points)
    _, idx = tree.query(cloud.points, k=k_eff)
    neighborhoods = cloud.points[idx]
    centered = neighborhoods - neighborhoods.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered)
    eigvals, eigvecs = np.linalg.eigh(cov)
    # rank < 2 <=> second-smallest eigenvalue vanishes relative to the largest
    degenerate = eigvals[:, 1] <= eigvals[:, 2] * 1e-9 + 1e-30
    if np.any(degenerate):
        raise DegenerateNeighborhood(
            f"{int(degenerate.sum())} neighborhoods have rank < 2"
        )
    normals = eigvecs[:, :, 0]
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    vp = np.array(viewpoint.as_tuple())
    facing = np.einsum("ij,ij->i", vp[None, :] - cloud.points, normals)
    normals = np.where(facing[:, None] < 0, -normals, normals)
    return SurfaceNormals(normals, viewpoint)


def _frame_from_normal(normal: np.ndarray) -> UnitQuaternion:
    """Full orientation from a unit normal: local +z = normal; local x is the
    normalized projection of world +z onto the tangent plane (world +x when
    the normal is parallel to world z)."""
    z = normal
    proj = np.array([0.0, 0.0, 1.0]) - z[2] * z
    if np.linalg.norm(proj) < 1e-8:
        proj = np.array([1.0, 0.0, 0.0]) - z[0] * z
    x = proj / np.linalg.norm(proj)
    y = np.cross(z, x)
    m = [[x[0], y[0], z[0]], [x[1], y[1], z[1]], [x[2], y[2], z[2]]]
    return UnitQuaternion.from_rotation_matrix(m)


def generate_fixtures(
    cloud: PointCloud,
    normals: SurfaceNormals,
    offset: float = DEFAULT_OFFSET,
    spacing: float = DEFAULT_SPACING,
) -> list[VirtualFixture]:
    """One fixture per occupied spacing-voxel, offset along the local normal.

    Samples are voxel centroids; each carries the normal of its nearest
    original point. All fixtures start reachable.
    """
    if not offset > 0:
        raise ValueError(f"offset must be > 0, got {offset}")
    if not spacing > 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    if len(normals.normals) != len(cloud):
        raise ValueError("normals must parallel the cloud")
    if len(cloud) == 0:
        return []
    samples = voxel_downsample(cloud, spacing)
    tree = cKDTree(cloud.points)
    _, nearest = tree.query(samples.points)
    fixtures = []
    for sample, normal in zip(samples.points, normals.normals[nearest]):
        position = sample + offset * normal
        pose = Pose(Point3(*position), _frame_from_normal(normal))
        fixtures.append(VirtualFixture(pose, Point3(*sample), True))
    return fixtures


def _attainable(fixture: VirtualFixture, reach: ReachabilityModel, roll_candidates: int) -> bool:
    d = fixture.pose.position - reach.shoulder
    r = d.norm()
    if not (reach.r_min <= r <= reach.r_max):
        return False
    if r < 1e-12:
        return True
    ray = d.scaled(1.0 / r)
    approach = fixture.approach_axis()
    # Roll about the approach axis never moves the axis itself, so the first
    # candidate decides; the search stays as the re-planning hook for richer
    # arm models.
    for _ in range(roll_candidates):
        deviation = math.acos(max(-1.0, min(1.0, approach.dot(ray))))
        if deviation <= reach.cone_half_angle:
            return True
    return False


def _boustrophedon_order(
    fixtures: list[VirtualFixture], spacing: float
) -> list[VirtualFixture]:
    """Serpentine ordering over the dominant plane of the fixture sources."""
    if len(fixtures) <= 1:
        return list(fixtures)
    sources = np.array([f.source.as_tuple() for f in fixtures])
    centered = sources - sources.mean(axis=0)
    _, eigvecs = np.linalg.eigh(centered.T @ centered)
    axis_u = eigvecs[:, 2]
    axis_v = eigvecs[:, 1]
    # deterministic eigenvector signs: largest-magnitude component positive
    if axis_u[np.argmax(np.abs(axis_u))] < 0:
        axis_u = -axis_u
    if axis_v[np.argmax(np.abs(axis_v))] < 0:
        axis_v = -axis_v
    u = centered @ axis_u
    v = centered @ axis_v
    # centered bins keep voxel-center sources (exact spacing multiples) away
    # from row boundaries
    rows = np.floor((v - v.min()) / spacing + 0.5).astype(np.int64)

    def key(i: int):
        serp = u[i] if rows[i] % 2 == 0 else -u[i]
        return (rows[i], serp, i)

    return [fixtures[i] for i in sorted(range(len(fixtures)), key=key)]


def plan_coverage(
    fixtures: list[VirtualFixture],
    reach: ReachabilityModel,
    roll_candidates: int = DEFAULT_ROLL_CANDIDATES,
    *,
    cluster_id: int = -1,
    spacing: float = DEFAULT_SPACING,
    offset: float = DEFAULT_OFFSET,
) -> RepairPlan:
    """Evaluate reachability and order fixtures for execution.

    Unattainable fixtures stay in the plan flagged reachable=False so the
    reviewer can see coverage gaps; an empty plan carries coverage 0.
    """
    if roll_candidates < 1:
        raise ValueError(f"roll_candidates must be >= 1, got {roll_candidates}")
    evaluated = [
        replace(f, reachable=_attainable(f, reach, roll_candidates)) for f in fixtures
    ]
    ordered = _boustrophedon_order(evaluated, spacing)
    total = len(ordered)
    coverage = (sum(1 for f in ordered if f.reachable) / total) if total else 0.0
    return RepairPlan(cluster_id, tuple(ordered), spacing, offset, coverage)


def plan_cluster(cluster: Cluster, params: PlannerParams) -> RepairPlan:
    """Full pipeline for an unmodified cluster."""
    normals = estimate_normals(cluster.cloud, params.k, params.viewpoint)
    fixtures = generate_fixtures(cluster.cloud, normals, params.offset, params.spacing)
    reach = params.reach if params.reach is not None else unconstrained_reach()
    return plan_coverage(
        fixtures,
        reach,
        params.roll_candidates,
        cluster_id=cluster.id,
        spacing=params.spacing,
        offset=params.offset,
    )


def replan_after_exclusion(
    cluster: Cluster, exclusions: ExclusionSet, params: PlannerParams
) -> tuple[RepairPlan, PointCloud]:
    """Carve out the excluded points and regenerate the plan.

    Returns the revised plan together with the retained cloud so both can be
    sent back to the reviewer. Raises ClusterMismatch when the set targets
    another cluster and EmptyAfterExclusion when fewer than 3 points remain.
    """
    if exclusions.cluster_id != cluster.id:
        raise ClusterMismatch(
            f"exclusion set targets cluster {exclusions.cluster_id}, not {cluster.id}"
        )
    retained, _removed = apply_exclusions(cluster.cloud, exclusions)
    if len(retained) < MIN_PLAN_POINTS:
        raise EmptyAfterExclusion(
            f"only {len(retained)} points remain after exclusion"
        )
    normals = estimate_normals(retained, params.k, params.viewpoint)
    fixtures = generate_fixtures(retained, normals, params.offset, params.spacing)
    reach = params.reach if params.reach is not None else unconstrained_reach()
    plan = plan_coverage(
        fixtures,
        reach,
        params.roll_candidates,
        cluster_id=cluster.id,
        spacing=params.spacing,
        offset=params.offset,
    )
    return plan, retained
