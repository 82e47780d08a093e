import numpy as np
import pytest

from star_repair.cloud import PointCloud
from star_repair.detection import (
    detect_corrosion_stub,
    detect_events,
    euclidean_cluster,
    make_cluster,
)
from star_repair.errors import MissingColors, NonPositiveRadius


def brute_force_components(points: np.ndarray, radius: float) -> list[set[int]]:
    """O(n^2) union-find over all pairs; the clustering oracle."""
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    r2 = radius * radius
    for i in range(n):
        d = points[i + 1:] - points[i]
        for j in np.flatnonzero((d * d).sum(axis=1) <= r2):
            ra, rb = find(i), find(int(j) + i + 1)
            if ra != rb:
                parent[ra] = rb
    groups: dict[int, set[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return list(groups.values())


def colored(points, rgb):
    colors = np.tile(np.asarray(rgb), (len(points), 1))
    return PointCloud(points, colors)


def test_all_rust_colored_points_detected():
    cloud = colored(np.random.default_rng(0).uniform(0, 1, (20, 3)), (200, 60, 40))
    assert len(detect_corrosion_stub(cloud)) == 20


def test_all_gray_points_ignored():
    cloud = colored(np.random.default_rng(0).uniform(0, 1, (20, 3)), (90, 90, 90))
    assert len(detect_corrosion_stub(cloud)) == 0


def test_threshold_is_conjunction():
    pts = np.zeros((4, 3))
    colors = np.array([
        [110, 95, 90],   # exactly at every bound: corroded
        [109, 95, 90],   # r below
        [110, 96, 90],   # g above
        [110, 95, 91],   # b above
    ])
    mask = detect_corrosion_stub(PointCloud(pts, colors))
    assert mask.indices.tolist() == [0]


def test_mixed_plate_matches_per_point_oracle(rng):
    n = 500
    pts = rng.uniform(0, 1, (n, 3))
    colors = rng.integers(0, 256, (n, 3))
    mask = detect_corrosion_stub(PointCloud(pts, colors))
    expected = [
        i for i in range(n)
        if colors[i, 0] >= 110 and colors[i, 1] <= 95 and colors[i, 2] <= 90
    ]
    assert mask.indices.tolist() == expected


def test_detection_monotone_in_r(rng):
    n = 200
    pts = rng.uniform(0, 1, (n, 3))
    colors = rng.integers(0, 256, (n, 3))
    base = set(detect_corrosion_stub(PointCloud(pts, colors)).indices.tolist())
    raised = colors.copy()
    raised[:, 0] = np.minimum(raised[:, 0] + 40, 255)
    bigger = set(detect_corrosion_stub(PointCloud(pts, raised)).indices.tolist())
    assert base <= bigger


def test_missing_colors_raises():
    with pytest.raises(MissingColors):
        detect_corrosion_stub(PointCloud(np.zeros((3, 3))))


def test_two_points_within_radius_form_one_cluster():
    cloud = PointCloud(np.array([[0, 0, 0], [0, 0, 0.01]]))
    clusters = euclidean_cluster(cloud, radius=0.05, min_size=2)
    assert len(clusters) == 1 and len(clusters[0].cloud) == 2


def test_far_points_form_singletons():
    cloud = PointCloud(np.array([[0, 0, 0], [1, 0, 0]]))
    clusters = euclidean_cluster(cloud, radius=0.05, min_size=1)
    assert [len(c.cloud) for c in clusters] == [1, 1]


def test_chain_of_100_is_one_cluster():
    pts = np.array([[0.04 * i, 0.0, 0.0] for i in range(100)])
    clusters = euclidean_cluster(PointCloud(pts), radius=0.05, min_size=1)
    assert len(clusters) == 1 and len(clusters[0].cloud) == 100
    oracle = brute_force_components(pts, 0.05)
    assert len(oracle) == 1


def test_min_size_filters_small_components():
    pts = np.vstack([np.zeros((5, 3)) + [0, 0, 0], np.zeros((2, 3)) + [5, 0, 0]])
    pts += np.arange(7)[:, None] * [0.001, 0, 0]
    clusters = euclidean_cluster(PointCloud(pts), radius=0.05, min_size=3)
    assert len(clusters) == 1 and len(clusters[0].cloud) == 5


def test_ordering_by_size_then_first_index():
    # two clusters of equal size: tie broken by smallest member index
    a = np.zeros((4, 3)) + [0, 0, 0]
    b = np.zeros((4, 3)) + [9, 0, 0]
    pts = np.empty((8, 3))
    pts[0::2] = b  # interleave so b holds index 0
    pts[1::2] = a
    clusters = euclidean_cluster(PointCloud(pts), radius=0.1, min_size=1)
    assert clusters[0].cloud.points[0, 0] == 9.0
    assert clusters[0].id == 0 and clusters[1].id == 1


def cluster_index_sets(pts: np.ndarray, clusters) -> set[frozenset[int]]:
    """Map cluster member points back to input indices (points are unique)."""
    where = {tuple(p): i for i, p in enumerate(pts.tolist())}
    return {
        frozenset(where[tuple(p)] for p in c.cloud.points.tolist()) for c in clusters
    }


def test_partition_against_brute_force_oracle(rng):
    for trial in range(10):
        n = int(rng.integers(50, 400))
        pts = rng.uniform(0, 1, (n, 3)) * [1, 1, 0.2]
        radius = float(rng.uniform(0.05, 0.2))
        min_size = int(rng.integers(1, 5))
        clusters = euclidean_cluster(PointCloud(pts), radius=radius, min_size=min_size)
        got = cluster_index_sets(pts, clusters)
        expected = {frozenset(g) for g in brute_force_components(pts, radius)
                    if len(g) >= min_size}
        assert got == expected
        # every retained point appears in exactly one cluster
        total = sum(len(c.cloud) for c in clusters)
        assert total == sum(len(g) for g in expected)


def test_permutation_invariance(rng):
    pts = rng.uniform(0, 1, (200, 3))
    cloud = PointCloud(pts)
    perm = rng.permutation(200)
    shuffled = PointCloud(pts[perm])
    a = euclidean_cluster(cloud, 0.1, 1)
    b = euclidean_cluster(shuffled, 0.1, 1)
    sets_a = {frozenset(map(tuple, c.cloud.points.tolist())) for c in a}
    sets_b = {frozenset(map(tuple, c.cloud.points.tolist())) for c in b}
    assert sets_a == sets_b


def test_centroid_is_mean():
    pts = np.array([[0, 0, 0], [0.02, 0, 0], [0.01, 0.03, 0]])
    c = make_cluster(0, PointCloud(pts))
    assert abs(c.centroid.x - pts[:, 0].mean()) < 1e-9
    assert abs(c.centroid.y - pts[:, 1].mean()) < 1e-9


def test_non_positive_radius():
    with pytest.raises(NonPositiveRadius):
        euclidean_cluster(PointCloud(np.zeros((1, 3))), radius=0.0, min_size=1)


def test_empty_cloud_clusters_to_nothing():
    assert euclidean_cluster(PointCloud(np.empty((0, 3))), 0.05, 1) == []


def test_detect_events_end_to_end(rng):
    rust = rng.uniform(0, 0.2, (50, 3))
    gray = rng.uniform(0, 0.2, (50, 3)) + [2.0, 0, 0]
    pts = np.vstack([rust, gray])
    colors = np.vstack([np.tile([180, 60, 40], (50, 1)), np.tile([120, 120, 120], (50, 1))])
    events = detect_events(PointCloud(pts, colors), "assets/x.png", 42.0,
                           radius=0.1, min_size=5)
    assert len(events) == 1
    assert len(events[0].cluster.cloud) == 50
    assert events[0].snapshot == "assets/x.png"
    assert events[0].timestamp == 42.0
