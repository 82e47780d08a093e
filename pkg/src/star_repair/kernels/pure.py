"""Pure NumPy backend for the hot kernels.

Always importable; used when the compiled module is unavailable or when
STAR_KERNELS=pure. The formulas are written in the same operation order as
the compiled backend (and geom.py) so both produce identical doubles.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

BACKEND_NAME = "pure"

SQRT2 = math.sqrt(2.0)

SHAPE_BOX = 0
SHAPE_CYLINDER = 1
SHAPE_SPHERE = 2

_CELL_OFFSETS = [
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
]

_MOVES8 = [
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
]


def cluster_labels(points: np.ndarray, radius: float) -> np.ndarray:
    """Label connected components of the graph linking points within `radius`.

    Neighbor search uses a uniform grid hash with cell size = radius, so
    candidates for a point are confined to its 27 surrounding cells.
    Returns int64 labels; numbering follows discovery order from index 0.
    """
    n = points.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels
    cells = np.floor(points / radius).astype(np.int64)
    buckets: dict[tuple[int, int, int], list[int]] = {}
    for i, key in enumerate(map(tuple, cells.tolist())):
        buckets.setdefault(key, []).append(i)
    members = {k: np.asarray(v, dtype=np.int64) for k, v in buckets.items()}
    r2 = radius * radius
    current = 0
    for seed in range(n):
        if labels[seed] >= 0:
            continue
        labels[seed] = current
        queue = deque([seed])
        while queue:
            i = queue.popleft()
            cx, cy, cz = cells[i]
            p = points[i]
            for dx, dy, dz in _CELL_OFFSETS:
                cand = members.get((cx + dx, cy + dy, cz + dz))
                if cand is None:
                    continue
                cand = cand[labels[cand] < 0]
                if cand.size == 0:
                    continue
                d = points[cand] - p
                near = cand[np.einsum("ij,ij->i", d, d) <= r2]
                if near.size:
                    labels[near] = current
                    queue.extend(near.tolist())
        current += 1
    return labels


def contain_mask(
    points: np.ndarray,
    shape_code: int,
    dims: np.ndarray,
    quat: np.ndarray,
    trans: np.ndarray,
) -> np.ndarray:
    """Boolean mask of points inside one posed volume (closed boundaries).

    `quat` is the volume pose orientation (w, x, y, z); points are mapped
    into the volume frame with the conjugate rotation, mirroring
    geom.inverse_transform_point exactly.
    """
    px = points[:, 0] - trans[0]
    py = points[:, 1] - trans[1]
    pz = points[:, 2] - trans[2]
    w = quat[0]
    qx = -quat[1]
    qy = -quat[2]
    qz = -quat[3]
    ux = qy * pz - qz * py
    uy = qz * px - qx * pz
    uz = qx * py - qy * px
    vx = qy * uz - qz * uy
    vy = qz * ux - qx * uz
    vz = qx * uy - qy * ux
    lx = px + 2.0 * (w * ux + vx)
    ly = py + 2.0 * (w * uy + vy)
    lz = pz + 2.0 * (w * uz + vz)
    if shape_code == SHAPE_BOX:
        return (
            (np.abs(lx) <= dims[0] * 0.5)
            & (np.abs(ly) <= dims[1] * 0.5)
            & (np.abs(lz) <= dims[2] * 0.5)
        )
    if shape_code == SHAPE_CYLINDER:
        r = dims[0]
        return (lx * lx + ly * ly <= r * r) & (np.abs(lz) <= dims[1] * 0.5)
    if shape_code == SHAPE_SPHERE:
        r = dims[0]
        return lx * lx + ly * ly + lz * lz <= r * r
    raise ValueError(f"unknown shape code {shape_code}")


def dijkstra_grid(
    occupancy: np.ndarray,
    start_row: int,
    start_col: int,
    goal_row: int,
    goal_col: int,
) -> tuple[float, np.ndarray]:
    """Minimum-cost 8-connected path on a boolean occupancy grid.

    Edge costs are 1 (orthogonal) and sqrt(2) (diagonal); diagonal moves are
    forbidden when either adjacent orthogonal cell is occupied. Costs are
    tracked as exact (straight, diagonal) step counts so equal-cost ties are
    recognized exactly; tied predecessors resolve to the smaller (row, col).

    Returns (cost, path) with path as an int64 (k, 2) array of cells;
    (inf, empty) when the goal is unreachable.
    """
    import heapq

    h, w = occupancy.shape
    dist = np.full((h, w), np.inf)
    straight = np.full((h, w), -1, dtype=np.int64)
    diagonal = np.full((h, w), -1, dtype=np.int64)
    pred_r = np.full((h, w), -1, dtype=np.int64)
    pred_c = np.full((h, w), -1, dtype=np.int64)
    done = np.zeros((h, w), dtype=bool)

    dist[start_row, start_col] = 0.0
    straight[start_row, start_col] = 0
    diagonal[start_row, start_col] = 0
    heap = [(0.0, start_row, start_col)]
    while heap:
        d, r, c = heapq.heappop(heap)
        if done[r, c]:
            continue
        done[r, c] = True
        if r == goal_row and c == goal_col:
            break
        for dr, dc in _MOVES8:
            nr = r + dr
            nc = c + dc
            if nr < 0 or nr >= h or nc < 0 or nc >= w:
                continue
            if occupancy[nr, nc]:
                continue
            if dr != 0 and dc != 0:
                if occupancy[r + dr, c] or occupancy[r, c + dc]:
                    continue
                na = straight[r, c]
                nb = diagonal[r, c] + 1
            else:
                na = straight[r, c] + 1
                nb = diagonal[r, c]
            nd = na + nb * SQRT2
            if nd < dist[nr, nc] - 1e-12:
                dist[nr, nc] = nd
                straight[nr, nc] = na
                diagonal[nr, nc] = nb
                pred_r[nr, nc] = r
                pred_c[nr, nc] = c
                heapq.heappush(heap, (nd, nr, nc))
            elif na == straight[nr, nc] and nb == diagonal[nr, nc]:
                if (r, c) < (pred_r[nr, nc], pred_c[nr, nc]):
                    pred_r[nr, nc] = r
                    pred_c[nr, nc] = c

    if not done[goal_row, goal_col]:
        return math.inf, np.empty((0, 2), dtype=np.int64)
    cells = []
    r, c = goal_row, goal_col
    while r != -1:
        cells.append((r, c))
        r, c = pred_r[r, c], pred_c[r, c]
    cells.reverse()
    return float(dist[goal_row, goal_col]), np.asarray(cells, dtype=np.int64)
