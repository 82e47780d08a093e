# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot kernels.

Mirrors kernels/pure.py operation-for-operation (same formulas, same
floating-point order; built with -ffp-contract=off) so both backends return
identical results. Keep the two files in sync.
"""

from libc.math cimport floor, sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "native"

SHAPE_BOX = 0
SHAPE_CYLINDER = 1
SHAPE_SPHERE = 2


# --- uniform-grid euclidean clustering ---

cdef inline long _find_cell(long* keys, long n_cells, long kx, long ky, long kz) nogil:
    """Binary search for (kx, ky, kz) in the lexicographically sorted key table."""
    cdef long lo = 0, hi = n_cells - 1, mid
    cdef long mx, my, mz
    while lo <= hi:
        mid = (lo + hi) >> 1
        mx = keys[3 * mid]
        my = keys[3 * mid + 1]
        mz = keys[3 * mid + 2]
        if mx == kx and my == ky and mz == kz:
            return mid
        if (mx < kx) or (mx == kx and (my < ky or (my == ky and mz < kz))):
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


def cluster_labels(cnp.ndarray[cnp.float64_t, ndim=2] points, double radius):
    """Connected-component labels over the within-`radius` graph."""
    cdef long n = points.shape[0]
    labels_arr = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=2] cells = np.floor(points / radius).astype(np.int64)

    # Sort point indices by cell key, then build a unique-cell table with
    # member ranges; neighbor lookup is a binary search over the table.
    order_arr = np.lexsort((cells[:, 2], cells[:, 1], cells[:, 0]))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.ascontiguousarray(order_arr, dtype=np.int64)
    sorted_cells = cells[order]
    first = np.ones(n, dtype=bool)
    first[1:] = np.any(sorted_cells[1:] != sorted_cells[:-1], axis=1)
    starts_arr = np.flatnonzero(first).astype(np.int64)
    cdef long n_cells = starts_arr.shape[0]
    ends_arr = np.empty(n_cells, dtype=np.int64)
    ends_arr[:-1] = starts_arr[1:]
    ends_arr[n_cells - 1] = n
    keys_arr = np.ascontiguousarray(sorted_cells[starts_arr], dtype=np.int64)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = labels_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] starts = starts_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ends = ends_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=2] keys2 = keys_arr
    cdef long* keys = <long*> cnp.PyArray_DATA(keys2)

    cdef long* queue = <long*> malloc(n * sizeof(long))
    if queue == NULL:
        raise MemoryError()
    cdef long head, tail, seed, i, j, cell, m, cand
    cdef long cx, cy, cz, dx, dy, dz
    cdef double r2 = radius * radius
    cdef double px, py, pz, ddx, ddy, ddz
    cdef long current = 0
    try:
        for seed in range(n):
            if labels[seed] >= 0:
                continue
            labels[seed] = current
            queue[0] = seed
            head = 0
            tail = 1
            while head < tail:
                i = queue[head]
                head += 1
                cx = cells[i, 0]
                cy = cells[i, 1]
                cz = cells[i, 2]
                px = points[i, 0]
                py = points[i, 1]
                pz = points[i, 2]
                for dx in range(-1, 2):
                    for dy in range(-1, 2):
                        for dz in range(-1, 2):
                            cell = _find_cell(keys, n_cells, cx + dx, cy + dy, cz + dz)
                            if cell < 0:
                                continue
                            for m in range(starts[cell], ends[cell]):
                                cand = order[m]
                                if labels[cand] >= 0:
                                    continue
                                ddx = points[cand, 0] - px
                                ddy = points[cand, 1] - py
                                ddz = points[cand, 2] - pz
                                if ddx * ddx + ddy * ddy + ddz * ddz <= r2:
                                    labels[cand] = current
                                    queue[tail] = cand
                                    tail += 1
            current += 1
    finally:
        free(queue)
    return labels_arr


# --- posed-volume containment ---

def contain_mask(
    cnp.ndarray[cnp.float64_t, ndim=2] points,
    int shape_code,
    cnp.ndarray[cnp.float64_t, ndim=1] dims,
    cnp.ndarray[cnp.float64_t, ndim=1] quat,
    cnp.ndarray[cnp.float64_t, ndim=1] trans,
):
    """Boolean mask of points inside one posed volume (closed boundaries)."""
    cdef long n = points.shape[0]
    out_arr = np.zeros(n, dtype=bool)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] out = out_arr
    cdef double w = quat[0]
    cdef double qx = -quat[1]
    cdef double qy = -quat[2]
    cdef double qz = -quat[3]
    cdef double tx = trans[0], ty = trans[1], tz = trans[2]
    cdef double d0 = dims[0], d1 = dims[1], d2 = dims[2]
    cdef double px, py, pz, ux, uy, uz, vx, vy, vz, lx, ly, lz
    cdef long i
    cdef bint inside
    for i in range(n):
        px = points[i, 0] - tx
        py = points[i, 1] - ty
        pz = points[i, 2] - tz
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
            inside = (fabs(lx) <= d0 * 0.5) and (fabs(ly) <= d1 * 0.5) and (fabs(lz) <= d2 * 0.5)
        elif shape_code == SHAPE_CYLINDER:
            inside = (lx * lx + ly * ly <= d0 * d0) and (fabs(lz) <= d1 * 0.5)
        elif shape_code == SHAPE_SPHERE:
            inside = lx * lx + ly * ly + lz * lz <= d0 * d0
        else:
            raise ValueError(f"unknown shape code {shape_code}")
        out[i] = inside
    return out_arr


# --- grid Dijkstra ---

cdef struct HeapEntry:
    double dist
    long row
    long col


cdef inline bint _heap_less(HeapEntry a, HeapEntry b) nogil:
    if a.dist != b.dist:
        return a.dist < b.dist
    if a.row != b.row:
        return a.row < b.row
    return a.col < b.col


cdef inline void _heap_push(HeapEntry* heap, long* size, HeapEntry item) nogil:
    cdef long i = size[0]
    cdef long parent
    cdef HeapEntry tmp
    heap[i] = item
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(heap[i], heap[parent]):
            tmp = heap[parent]
            heap[parent] = heap[i]
            heap[i] = tmp
            i = parent
        else:
            break


cdef inline HeapEntry _heap_pop(HeapEntry* heap, long* size) nogil:
    cdef HeapEntry top = heap[0]
    cdef long i = 0, child
    cdef HeapEntry tmp
    size[0] -= 1
    heap[0] = heap[size[0]]
    while True:
        child = 2 * i + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and _heap_less(heap[child + 1], heap[child]):
            child += 1
        if _heap_less(heap[child], heap[i]):
            tmp = heap[i]
            heap[i] = heap[child]
            heap[child] = tmp
            i = child
        else:
            break
    return top


def dijkstra_grid(
    cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] occupancy,
    long start_row,
    long start_col,
    long goal_row,
    long goal_col,
):
    """Minimum-cost 8-connected grid path; see the pure backend for the contract."""
    cdef long h = occupancy.shape[0]
    cdef long w = occupancy.shape[1]
    cdef long n = h * w
    cdef double SQRT2 = sqrt(2.0)

    dist_arr = np.full(n, np.inf)
    straight_arr = np.full(n, -1, dtype=np.int64)
    diagonal_arr = np.full(n, -1, dtype=np.int64)
    pred_arr = np.full(n, -1, dtype=np.int64)
    done_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = dist_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] straight = straight_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] diagonal = diagonal_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pred = pred_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done = done_arr

    cdef long[8] move_r = [-1, -1, -1, 0, 0, 1, 1, 1]
    cdef long[8] move_c = [-1, 0, 1, -1, 1, -1, 0, 1]

    # one push per edge relaxation plus the seed: 8n + 1 bounds the heap
    cdef HeapEntry* heap = <HeapEntry*> malloc((8 * n + 8) * sizeof(HeapEntry))
    if heap == NULL:
        raise MemoryError()
    cdef long heap_size = 0
    cdef HeapEntry entry
    cdef long r, c, nr, nc, idx, nidx, k, na, nb, pr, pc
    cdef double nd

    entry.dist = 0.0
    entry.row = start_row
    entry.col = start_col
    dist[start_row * w + start_col] = 0.0
    straight[start_row * w + start_col] = 0
    diagonal[start_row * w + start_col] = 0
    _heap_push(heap, &heap_size, entry)
    try:
        while heap_size > 0:
            entry = _heap_pop(heap, &heap_size)
            r = entry.row
            c = entry.col
            idx = r * w + c
            if done[idx]:
                continue
            done[idx] = 1
            if r == goal_row and c == goal_col:
                break
            for k in range(8):
                nr = r + move_r[k]
                nc = c + move_c[k]
                if nr < 0 or nr >= h or nc < 0 or nc >= w:
                    continue
                nidx = nr * w + nc
                if occupancy[nr, nc]:
                    continue
                if move_r[k] != 0 and move_c[k] != 0:
                    if occupancy[r + move_r[k], c] or occupancy[r, c + move_c[k]]:
                        continue
                    na = straight[idx]
                    nb = diagonal[idx] + 1
                else:
                    na = straight[idx] + 1
                    nb = diagonal[idx]
                nd = na + nb * SQRT2
                if nd < dist[nidx] - 1e-12:
                    dist[nidx] = nd
                    straight[nidx] = na
                    diagonal[nidx] = nb
                    pred[nidx] = idx
                    entry.dist = nd
                    entry.row = nr
                    entry.col = nc
                    _heap_push(heap, &heap_size, entry)
                elif na == straight[nidx] and nb == diagonal[nidx]:
                    pr = pred[nidx] // w
                    pc = pred[nidx] % w
                    if r < pr or (r == pr and c < pc):
                        pred[nidx] = idx
    finally:
        free(heap)

    cdef long goal_idx = goal_row * w + goal_col
    if not done[goal_idx]:
        return float("inf"), np.empty((0, 2), dtype=np.int64)
    cells = []
    idx = goal_idx
    while idx != -1:
        cells.append((idx // w, idx % w))
        idx = pred[idx]
    cells.reverse()
    return float(dist[goal_idx]), np.asarray(cells, dtype=np.int64)
