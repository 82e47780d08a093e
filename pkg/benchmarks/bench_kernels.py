#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--points N] [--grid N] [--repeat R]
"""

import argparse
import time

import numpy as np

from star_repair.kernels import backends


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_cluster(mod, points, radius, repeat):
    return timeit(lambda: mod.cluster_labels(points, radius), repeat)


def bench_contain(mod, points, repeat):
    dims = np.array([0.6, 0.5, 0.4])
    quat = np.array([0.9238795325112867, 0.0, 0.0, 0.3826834323650898])
    trans = np.array([0.1, -0.2, 0.3])
    return timeit(lambda: mod.contain_mask(points, 0, dims, quat, trans), repeat)


def bench_dijkstra(mod, occ, repeat):
    h, w = occ.shape
    return timeit(lambda: mod.dijkstra_grid(occ, 0, 0, h - 1, w - 1), repeat)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=60_000)
    parser.add_argument("--grid", type=int, default=400)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(12)
    cloud = rng.uniform(0, 1, (args.points, 3)) * [1.0, 1.0, 0.02]
    occ = (rng.uniform(size=(args.grid, args.grid)) < 0.25).astype(np.uint8)
    # clear a corridor so the goal is always reachable
    occ[0, :] = 0
    occ[:, -1] = 0

    mods = backends()
    if len(mods) < 2:
        print("compiled backend not built; run `pip install -e .` with a compiler")
    workloads = [
        (f"cluster_labels ({args.points} pts)",
         lambda mod: bench_cluster(mod, cloud, 0.01, args.repeat)),
        (f"contain_mask ({args.points} pts)",
         lambda mod: bench_contain(mod, cloud, args.repeat)),
        (f"dijkstra_grid ({args.grid}x{args.grid})",
         lambda mod: bench_dijkstra(mod, occ, args.repeat)),
    ]

    print(f"{'kernel':<34} " + " ".join(f"{name:>12}" for name in mods) + "  speedup")
    for label, runner in workloads:
        times = {}
        results = {}
        for name, mod in mods.items():
            times[name], results[name] = runner(mod)
        row = f"{label:<34} " + " ".join(f"{times[n] * 1e3:>10.2f}ms" for n in mods)
        if "native" in times and "pure" in times:
            row += f"  {times['pure'] / times['native']:>6.1f}x"
        print(row)
        if len(results) == 2:
            a, b = results.values()
            if isinstance(a, tuple):
                assert a[0] == b[0], "backends disagree on cost"
            else:
                assert a.shape == b.shape, "backends disagree on shape"


if __name__ == "__main__":
    main()
