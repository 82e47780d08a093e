"""Point clouds: ASCII PCD v0.7 subset I/O and voxel downsampling.

Supported PCD subset: header keywords VERSION, FIELDS, SIZE, TYPE, COUNT,
WIDTH, HEIGHT, VIEWPOINT, POINTS, DATA (ascii only) in that order; FIELDS
must contain at least x y z, with color as three integer fields r g b.
The packed-float "rgb" encoding is rejected rather than misread.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from star_repair.errors import (
    CountMismatch,
    MalformedHeader,
    NonFiniteValue,
    NonPositiveLeaf,
)

_HEADER_ORDER = [
    "VERSION", "FIELDS", "SIZE", "TYPE", "COUNT",
    "WIDTH", "HEIGHT", "VIEWPOINT", "POINTS", "DATA",
]


@dataclass(frozen=True)
class Rgb:
    """One 8-bit color sample."""

    r: int
    g: int
    b: int

    def __post_init__(self):
        for v in (self.r, self.g, self.b):
            if not 0 <= v <= 255:
                raise ValueError(f"color channel {v} outside 0..255")


@dataclass(frozen=True, eq=False)
class PointCloud:
    """An ordered set of 3D points with optional per-point color.

    points is float64 (n, 3); colors, when present, is a parallel integer
    (n, 3) array with channels in 0..255. Arrays are frozen read-only.
    """

    points: np.ndarray
    colors: Optional[np.ndarray] = None
    frame_id: str = "world"

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (n, 3), got {pts.shape}")
        if pts.size and not np.all(np.isfinite(pts)):
            raise NonFiniteValue("point cloud contains non-finite coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.colors is not None:
            col = np.ascontiguousarray(np.asarray(self.colors, dtype=np.int64))
            if col.shape != pts.shape:
                raise ValueError("colors must parallel points (same (n, 3) shape)")
            if col.size and (col.min() < 0 or col.max() > 255):
                raise ValueError("color channels must lie in 0..255")
            col.flags.writeable = False
            object.__setattr__(self, "colors", col)

    def __len__(self) -> int:
        return self.points.shape[0]

    def select(self, indices) -> "PointCloud":
        """Sub-cloud at the given indices, order preserved, colors carried."""
        idx = np.asarray(indices, dtype=np.int64)
        colors = self.colors[idx] if self.colors is not None else None
        return PointCloud(self.points[idx], colors, self.frame_id)

    def equals(self, other: "PointCloud") -> bool:
        if len(self) != len(other) or self.frame_id != other.frame_id:
            return False
        if (self.colors is None) != (other.colors is None):
            return False
        if not np.array_equal(self.points, other.points):
            return False
        return self.colors is None or np.array_equal(self.colors, other.colors)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.equals(other)


def _header_value(lines: list[str], keyword: str) -> list[str]:
    for line in lines:
        parts = line.split()
        if parts and parts[0] == keyword:
            return parts[1:]
    raise MalformedHeader(f"missing required header keyword {keyword}")


def parse_pcd(text: str) -> PointCloud:
    """Parse an ASCII PCD v0.7 document into a point cloud.

    Unknown fields are ignored; a single packed "rgb" field is rejected.
    Raises MalformedHeader, CountMismatch, or NonFiniteValue.
    """
    raw_lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in raw_lines if ln and not ln.startswith("#")]
    header: list[str] = []
    body_start = 0
    for i, ln in enumerate(lines):
        header.append(ln)
        if ln.split()[0] == "DATA":
            body_start = i + 1
            break
    else:
        raise MalformedHeader("missing required header keyword DATA")

    keywords = [ln.split()[0] for ln in header if ln.split()[0] in _HEADER_ORDER]
    if keywords != _HEADER_ORDER:
        for kw in _HEADER_ORDER:
            _header_value(header, kw)  # raises naming the missing keyword
        raise MalformedHeader(
            f"header keywords out of order: {' '.join(keywords)}"
        )

    fields = _header_value(header, "FIELDS")
    if "rgb" in fields:
        raise MalformedHeader("packed-float rgb field is not supported; use r g b")
    for axis in ("x", "y", "z"):
        if axis not in fields:
            raise MalformedHeader(f"FIELDS must include {axis}")
    data_kind = _header_value(header, "DATA")
    if not data_kind or data_kind[0] != "ascii":
        raise MalformedHeader("only DATA ascii is supported")
    try:
        count = int(_header_value(header, "POINTS")[0])
    except (ValueError, IndexError):
        raise MalformedHeader("POINTS value is not an integer") from None

    xi, yi, zi = fields.index("x"), fields.index("y"), fields.index("z")
    has_colors = all(ch in fields for ch in ("r", "g", "b"))
    if has_colors:
        ri, gi, bi = fields.index("r"), fields.index("g"), fields.index("b")
    body = lines[body_start:]
    if len(body) != count:
        raise CountMismatch(f"header declares POINTS {count} but body has {len(body)} rows")

    points = np.empty((count, 3), dtype=np.float64)
    colors = np.empty((count, 3), dtype=np.int64) if has_colors else None
    for row, ln in enumerate(body):
        tokens = ln.split()
        if len(tokens) != len(fields):
            raise CountMismatch(
                f"row {row} has {len(tokens)} values, expected {len(fields)}"
            )
        try:
            points[row, 0] = float(tokens[xi])
            points[row, 1] = float(tokens[yi])
            points[row, 2] = float(tokens[zi])
        except ValueError:
            raise NonFiniteValue(f"row {row} has a non-numeric coordinate") from None
        if colors is not None:
            try:
                colors[row, 0] = int(float(tokens[ri]))
                colors[row, 1] = int(float(tokens[gi]))
                colors[row, 2] = int(float(tokens[bi]))
            except ValueError:
                raise NonFiniteValue(f"row {row} has a non-numeric color") from None
    if count and not np.all(np.isfinite(points)):
        raise NonFiniteValue("point cloud contains non-finite coordinates")
    return PointCloud(points, colors)


def serialize_pcd(cloud: PointCloud) -> str:
    """Render a cloud as ASCII PCD v0.7; coordinates use 9 significant digits.

    The output reparses to an equal cloud whenever coordinates survive
    9-significant-digit printing (always true for clouds produced by
    parse_pcd, making serialize/parse idempotent).
    """
    n = len(cloud)
    has_colors = cloud.colors is not None
    fields = "x y z r g b" if has_colors else "x y z"
    k = 6 if has_colors else 3
    sizes = " ".join(["4"] * k)
    types = "F F F I I I" if has_colors else "F F F"
    counts = " ".join(["1"] * k)
    out = [
        "# .PCD v0.7 - Point Cloud Data file format",
        "VERSION 0.7",
        f"FIELDS {fields}",
        f"SIZE {sizes}",
        f"TYPE {types}",
        f"COUNT {counts}",
        f"WIDTH {n}",
        "HEIGHT 1",
        "VIEWPOINT 0 0 0 1 0 0 0",
        f"POINTS {n}",
        "DATA ascii",
    ]
    for i in range(n):
        x, y, z = cloud.points[i]
        row = f"{x:.9g} {y:.9g} {z:.9g}"
        if has_colors:
            r, g, b = cloud.colors[i]
            row += f" {r} {g} {b}"
        out.append(row)
    return "\n".join(out) + "\n"


def voxel_indices(points: np.ndarray, leaf: float) -> np.ndarray:
    """Per-point voxel index floor(p/leaf); boundary points land in the higher voxel."""
    return np.floor(points / leaf).astype(np.int64)


def voxel_downsample(cloud: PointCloud, leaf: float) -> PointCloud:
    """One point per occupied voxel of side `leaf`, at the voxel members' centroid.

    Output points are ordered by voxel index (lexicographic), which makes the
    operation deterministic under input permutation. Colors are dropped.
    """
    if not leaf > 0:
        raise NonPositiveLeaf(f"leaf must be > 0, got {leaf}")
    if len(cloud) == 0:
        return PointCloud(np.empty((0, 3)), frame_id=cloud.frame_id)
    keys = voxel_indices(cloud.points, leaf)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
    sorted_keys = keys[order]
    first = np.ones(len(cloud), dtype=bool)
    first[1:] = np.any(sorted_keys[1:] != sorted_keys[:-1], axis=1)
    group = np.cumsum(first) - 1
    m = int(group[-1]) + 1
    sums = np.zeros((m, 3), dtype=np.float64)
    np.add.at(sums, group, cloud.points[order])
    counts = np.bincount(group, minlength=m).astype(np.float64)
    centroids = sums / counts[:, None]
    return PointCloud(centroids, frame_id=cloud.frame_id)
