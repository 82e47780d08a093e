"""Robot base placement and grid navigation.

The world model is a 2D occupancy grid; the goal pose is searched over a
small fan of candidates in front of the cluster, and paths to it come from
Dijkstra over the 8-connected grid.

Grid text format: first line "W H resolution", then H rows of W characters,
'.' free and '#' occupied. Cell (row, col) covers the world square starting
at origin + (col, row) * resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from star_repair.coverage import SurfaceNormals
from star_repair.detection import Cluster
from star_repair.errors import (
    CellOccupied,
    DegenerateNormal,
    NoPath,
    NoValidPose,
    OutOfBounds,
)
from star_repair.geom import Point3
from star_repair import kernels

# goal search fan: distances first (outward around the standoff), then
# headings symmetric outward; first collision-free candidate wins
_DISTANCE_STEPS = (0.0, 0.1, -0.1, 0.2, -0.2)
_HEADINGS = tuple(
    math.radians(a) for a in (0.0, 15.0, -15.0, 30.0, -30.0, 45.0, -45.0)
)


@dataclass(frozen=True)
class RobotFootprint:
    """Circumscribed base circle."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"footprint radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class GoalPose:
    """Planar base placement: position at z=0 and yaw in (-pi, pi]."""

    position: Point3
    yaw: float
    cluster_id: int


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    width: int
    height: int
    resolution: float
    origin: Point3
    occupancy: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            (self.width, self.height, self.resolution, self.origin)
            == (other.width, other.height, other.resolution, other.origin)
            and np.array_equal(self.occupancy, other.occupancy)
        )

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        occ = np.ascontiguousarray(np.asarray(self.occupancy, dtype=bool))
        if occ.shape != (self.height, self.width):
            raise ValueError(
                f"occupancy shape {occ.shape} != (height, width) {(self.height, self.width)}"
            )
        occ.flags.writeable = False
        object.__setattr__(self, "occupancy", occ)

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def is_free(self, cell: tuple[int, int]) -> bool:
        return self.in_bounds(cell) and not self.occupancy[cell[0], cell[1]]

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        col = int(math.floor((x - self.origin.x) / self.resolution))
        row = int(math.floor((y - self.origin.y) / self.resolution))
        return (row, col)

    def center_of(self, cell: tuple[int, int]) -> tuple[float, float]:
        r, c = cell
        return (
            self.origin.x + (c + 0.5) * self.resolution,
            self.origin.y + (r + 0.5) * self.resolution,
        )

    def world_extent(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max)."""
        return (
            self.origin.x,
            self.origin.y,
            self.origin.x + self.width * self.resolution,
            self.origin.y + self.height * self.resolution,
        )


def parse_grid(text: str) -> OccupancyGrid:
    lines = [ln.rstrip("\n") for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty grid file")
    head = lines[0].split()
    if len(head) < 3:
        raise ValueError(f"grid header must be 'W H resolution', got {lines[0]!r}")
    w, h, res = int(head[0]), int(head[1]), float(head[2])
    rows = lines[1:]
    if len(rows) != h:
        raise ValueError(f"grid declares {h} rows but has {len(rows)}")
    occ = np.zeros((h, w), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != w:
            raise ValueError(f"grid row {r} has {len(row)} cells, expected {w}")
        for c, ch in enumerate(row):
            if ch == "#":
                occ[r, c] = True
            elif ch != ".":
                raise ValueError(f"grid row {r} has invalid cell {ch!r}")
    return OccupancyGrid(w, h, res, Point3(0.0, 0.0, 0.0), occ)


def serialize_grid(grid: OccupancyGrid) -> str:
    out = [f"{grid.width} {grid.height} {grid.resolution:.9g}"]
    for r in range(grid.height):
        out.append("".join("#" if grid.occupancy[r, c] else "." for c in range(grid.width)))
    return "\n".join(out) + "\n"


def footprint_clear(grid: OccupancyGrid, x: float, y: float, radius: float) -> bool:
    """True when the footprint disk stays on the grid and every covered cell
    center is free."""
    x_min, y_min, x_max, y_max = grid.world_extent()
    if x - radius < x_min or x + radius > x_max or y - radius < y_min or y + radius > y_max:
        return False
    r_lo, c_lo = grid.cell_of(x - radius, y - radius)
    r_hi, c_hi = grid.cell_of(x + radius, y + radius)
    r2 = radius * radius
    for r in range(max(r_lo, 0), min(r_hi, grid.height - 1) + 1):
        for c in range(max(c_lo, 0), min(c_hi, grid.width - 1) + 1):
            cx, cy = grid.center_of((r, c))
            if (cx - x) ** 2 + (cy - y) ** 2 <= r2 and grid.occupancy[r, c]:
                return False
    return True


def goal_candidates(
    centroid: Point3, direction_xy: tuple[float, float], standoff: float
) -> list[tuple[float, float]]:
    """Candidate base positions in deterministic search order (d-major)."""
    dx, dy = direction_xy
    out = []
    for step in _DISTANCE_STEPS:
        d = standoff + step
        for theta in _HEADINGS:
            ct, st = math.cos(theta), math.sin(theta)
            rx = ct * dx - st * dy
            ry = st * dx + ct * dy
            out.append((centroid.x + d * rx, centroid.y + d * ry))
    return out


def compute_goal_pose(
    cluster: Cluster,
    normals: SurfaceNormals,
    footprint: RobotFootprint,
    grid: OccupancyGrid,
    standoff: float = 0.8,
) -> GoalPose:
    """Base placement in front of the cluster along its mean normal.

    Candidates fan outward from the standoff distance and +/-45 degrees of
    heading; the first whose footprint disk is fully free wins, yaw facing
    the cluster centroid.
    """
    if not standoff > footprint.radius:
        raise ValueError(
            f"standoff {standoff} must exceed footprint radius {footprint.radius}"
        )
    mean = normals.normals.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        raise DegenerateNormal("mean normal vanishes")
    nbar = mean / norm
    xy_norm = math.hypot(nbar[0], nbar[1])
    if xy_norm < 1e-6:
        raise DegenerateNormal("mean normal is vertical; no planar approach direction")
    direction = (nbar[0] / xy_norm, nbar[1] / xy_norm)
    for x, y in goal_candidates(cluster.centroid, direction, standoff):
        if footprint_clear(grid, x, y, footprint.radius):
            yaw = math.atan2(cluster.centroid.y - y, cluster.centroid.x - x)
            if yaw <= -math.pi:
                yaw = math.pi
            return GoalPose(Point3(x, y, 0.0), yaw, cluster.id)
    raise NoValidPose("all goal candidates collide or leave the grid")


def dijkstra_path(
    grid: OccupancyGrid, start: tuple[int, int], goal: tuple[int, int]
) -> tuple[list[tuple[int, int]], float]:
    """Minimum-cost 8-connected path between grid cells.

    Costs are 1 per orthogonal step and sqrt(2) per diagonal; diagonals may
    not cut occupied corners. Returns (path, cost); raises OutOfBounds,
    CellOccupied, or NoPath.
    """
    for name, cell in (("start", start), ("goal", goal)):
        if not grid.in_bounds(cell):
            raise OutOfBounds(f"{name} cell {cell} outside {grid.height}x{grid.width} grid")
        if grid.occupancy[cell[0], cell[1]]:
            raise CellOccupied(f"{name} cell {cell} is occupied")
    cost, path = kernels.dijkstra_grid(
        np.ascontiguousarray(grid.occupancy, dtype=np.uint8),
        int(start[0]), int(start[1]), int(goal[0]), int(goal[1]),
    )
    if math.isinf(cost):
        raise NoPath(f"no path from {start} to {goal}")
    return [(int(r), int(c)) for r, c in path], float(cost)


def render_path(grid: OccupancyGrid, path: list[tuple[int, int]]) -> str:
    """ASCII map with the path overlaid ('S' start, 'G' goal, '*' between)."""
    canvas = [
        ["#" if grid.occupancy[r, c] else "." for c in range(grid.width)]
        for r in range(grid.height)
    ]
    for r, c in path[1:-1]:
        canvas[r][c] = "*"
    if path:
        canvas[path[0][0]][path[0][1]] = "S"
        canvas[path[-1][0]][path[-1][1]] = "G"
    return "\n".join("".join(row) for row in canvas)
