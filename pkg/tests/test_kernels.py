"""Backend equivalence: the compiled and pure kernels must agree exactly."""

import numpy as np
import pytest

from star_repair import kernels

BACKENDS = kernels.backends()
pairwise = pytest.mark.skipif(
    len(BACKENDS) < 2, reason="compiled backend not built"
)


def label_partition(labels: np.ndarray) -> set[frozenset[int]]:
    return {
        frozenset(np.flatnonzero(labels == v).tolist()) for v in np.unique(labels)
    }


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_cluster_labels_cover_all_points(name, rng):
    pts = rng.uniform(0, 1, (300, 3))
    labels = BACKENDS[name].cluster_labels(pts, 0.08)
    assert labels.shape == (300,)
    assert (labels >= 0).all()


@pairwise
def test_cluster_backends_agree(rng):
    for _ in range(10):
        pts = rng.uniform(0, 1, (int(rng.integers(10, 500)), 3))
        radius = float(rng.uniform(0.03, 0.3))
        parts = [
            label_partition(mod.cluster_labels(pts, radius))
            for mod in BACKENDS.values()
        ]
        assert parts[0] == parts[1]


@pairwise
def test_contain_mask_backends_bitwise_equal(rng):
    for _ in range(50):
        pts = rng.uniform(-2, 2, (200, 3))
        code = int(rng.integers(3))
        dims = rng.uniform(0.1, 1.5, 3)
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        t = rng.uniform(-1, 1, 3)
        masks = [
            mod.contain_mask(pts, code, dims, q, t) for mod in BACKENDS.values()
        ]
        assert np.array_equal(masks[0], masks[1])


@pairwise
def test_dijkstra_backends_identical(rng):
    for _ in range(25):
        occ = (rng.uniform(size=(20, 20)) < 0.3).astype(np.uint8)
        free = np.argwhere(occ == 0)
        s, g = free[rng.integers(len(free))], free[rng.integers(len(free))]
        results = [
            mod.dijkstra_grid(occ, int(s[0]), int(s[1]), int(g[0]), int(g[1]))
            for mod in BACKENDS.values()
        ]
        (c0, p0), (c1, p1) = results
        assert c0 == c1
        assert np.array_equal(p0, p1)
