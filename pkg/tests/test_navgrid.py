import math

import numpy as np
import pytest

from star_repair.cloud import PointCloud
from star_repair.coverage import SurfaceNormals
from star_repair.detection import make_cluster
from star_repair.errors import (
    CellOccupied,
    DegenerateNormal,
    NoPath,
    NoValidPose,
    OutOfBounds,
)
from star_repair.geom import Point3
from star_repair.navgrid import (
    OccupancyGrid,
    RobotFootprint,
    compute_goal_pose,
    dijkstra_path,
    footprint_clear,
    goal_candidates,
    parse_grid,
    render_path,
    serialize_grid,
)
from oracles import bellman_ford_grid


def empty_grid(w=100, h=100, res=0.05, origin=Point3(-2.5, -2.5, 0.0)):
    return OccupancyGrid(w, h, res, origin, np.zeros((h, w), dtype=bool))


def plate_cluster_facing_minus_x():
    """Plate centroid (2, 0, 0.5), mean normal (-1, 0, 0)."""
    ys, zs = np.meshgrid(np.linspace(-0.3, 0.3, 13), np.linspace(0.2, 0.8, 13))
    pts = np.column_stack([np.full(ys.size, 2.0), ys.ravel(), zs.ravel()])
    cluster = make_cluster(0, PointCloud(pts))
    normals = SurfaceNormals(np.tile([-1.0, 0.0, 0.0], (len(pts), 1)), Point3(0, 0, 0.5))
    return cluster, normals


def test_goal_first_candidate_on_empty_grid():
    cluster, normals = plate_cluster_facing_minus_x()
    goal = compute_goal_pose(cluster, normals, RobotFootprint(0.3), empty_grid(), standoff=0.8)
    assert abs(goal.position.x - 1.2) < 1e-9
    assert abs(goal.position.y - 0.0) < 1e-9
    assert goal.position.z == 0.0
    assert abs(goal.yaw - 0.0) < 1e-9


def test_goal_fully_occupied_grid():
    cluster, normals = plate_cluster_facing_minus_x()
    grid = OccupancyGrid(40, 40, 0.1, Point3(-1, -1, 0), np.ones((40, 40), dtype=bool))
    with pytest.raises(NoValidPose):
        compute_goal_pose(cluster, normals, RobotFootprint(0.3), grid, standoff=0.8)


def test_goal_falls_back_to_second_candidate():
    cluster, normals = plate_cluster_facing_minus_x()
    grid = empty_grid()
    candidates = goal_candidates(cluster.centroid, (-1.0, 0.0), 0.8)
    # one occupied cell inside candidate 0's footprint disk but outside
    # candidate 1's: (1.2, 0.29) is 0.29 from c0 and ~0.50 from c1
    occ = grid.occupancy.copy()
    occ.flags.writeable = True
    occ[grid.cell_of(1.2, 0.29)] = True
    blocked = OccupancyGrid(grid.width, grid.height, grid.resolution, grid.origin, occ)
    assert not footprint_clear(blocked, *candidates[0], 0.3)
    assert footprint_clear(blocked, *candidates[1], 0.3)
    goal = compute_goal_pose(cluster, normals, RobotFootprint(0.3), blocked, standoff=0.8)
    # independent oracle: first candidate whose disk is clear
    expected = next(
        (x, y) for x, y in candidates if footprint_clear(blocked, x, y, 0.3)
    )
    assert (goal.position.x, goal.position.y) == pytest.approx(expected, abs=1e-12)
    assert candidates.index(expected) == 1


def test_goal_footprint_never_on_occupied(rng):
    cluster, normals = plate_cluster_facing_minus_x()
    for _ in range(20):
        occ = rng.uniform(size=(100, 100)) < 0.1
        grid = OccupancyGrid(100, 100, 0.05, Point3(-2.5, -2.5, 0), occ)
        try:
            goal = compute_goal_pose(cluster, normals, RobotFootprint(0.25), grid, 0.8)
        except NoValidPose:
            continue
        for r in range(grid.height):
            for c in range(grid.width):
                if not grid.occupancy[r, c]:
                    continue
                cx, cy = grid.center_of((r, c))
                d2 = (cx - goal.position.x) ** 2 + (cy - goal.position.y) ** 2
                assert d2 > 0.25 ** 2


def test_goal_degenerate_vertical_normal():
    pts = np.column_stack([np.linspace(0, 1, 30), np.linspace(0, 1, 30), np.zeros(30)])
    cluster = make_cluster(0, PointCloud(pts))
    normals = SurfaceNormals(np.tile([0.0, 0.0, 1.0], (30, 1)), Point3(0, 0, 2))
    with pytest.raises(DegenerateNormal):
        compute_goal_pose(cluster, normals, RobotFootprint(0.3), empty_grid(), 0.8)


def test_goal_standoff_must_exceed_footprint():
    cluster, normals = plate_cluster_facing_minus_x()
    with pytest.raises(ValueError):
        compute_goal_pose(cluster, normals, RobotFootprint(0.5), empty_grid(), 0.4)


def test_yaw_range(rng):
    cluster, normals = plate_cluster_facing_minus_x()
    goal = compute_goal_pose(cluster, normals, RobotFootprint(0.3), empty_grid(), 0.8)
    assert -math.pi < goal.yaw <= math.pi


def test_grid_round_trip():
    occ = np.zeros((3, 4), dtype=bool)
    occ[1, 2] = True
    grid = OccupancyGrid(4, 3, 0.5, Point3(0, 0, 0), occ)
    text = serialize_grid(grid)
    back = parse_grid(text)
    assert back.width == 4 and back.height == 3 and back.resolution == 0.5
    assert np.array_equal(back.occupancy, occ)


def test_grid_bad_cell_rejected():
    with pytest.raises(ValueError):
        parse_grid("2 1 0.5\n.x\n")


def test_grid_row_count_mismatch():
    with pytest.raises(ValueError):
        parse_grid("2 2 0.5\n..\n")


def test_dijkstra_start_equals_goal():
    grid = empty_grid(5, 5, 1.0, Point3(0, 0, 0))
    path, cost = dijkstra_path(grid, (2, 2), (2, 2))
    assert path == [(2, 2)] and cost == 0.0


def test_dijkstra_5x5_corner_to_corner():
    grid = empty_grid(5, 5, 1.0, Point3(0, 0, 0))
    path, cost = dijkstra_path(grid, (0, 0), (4, 4))
    oracle = bellman_ford_grid(np.zeros((5, 5), dtype=bool), (0, 0))
    assert abs(cost - oracle[4, 4]) < 1e-9
    assert abs(cost - 4 * math.sqrt(2)) < 1e-9


def test_dijkstra_wall_means_no_path():
    occ = np.zeros((5, 5), dtype=bool)
    occ[:, 2] = True
    grid = OccupancyGrid(5, 5, 1.0, Point3(0, 0, 0), occ)
    with pytest.raises(NoPath):
        dijkstra_path(grid, (0, 0), (0, 4))


def test_dijkstra_bounds_and_occupancy_errors():
    occ = np.zeros((5, 5), dtype=bool)
    occ[1, 1] = True
    grid = OccupancyGrid(5, 5, 1.0, Point3(0, 0, 0), occ)
    with pytest.raises(OutOfBounds):
        dijkstra_path(grid, (-1, 0), (4, 4))
    with pytest.raises(OutOfBounds):
        dijkstra_path(grid, (0, 0), (5, 0))
    with pytest.raises(CellOccupied):
        dijkstra_path(grid, (1, 1), (4, 4))


def test_dijkstra_matches_bellman_ford_on_random_grids(rng):
    for _ in range(10):
        occ = rng.uniform(size=(20, 20)) < 0.25
        free = np.argwhere(~occ)
        s = tuple(map(int, free[rng.integers(len(free))]))
        g = tuple(map(int, free[rng.integers(len(free))]))
        grid = OccupancyGrid(20, 20, 1.0, Point3(0, 0, 0), occ)
        oracle = bellman_ford_grid(occ, s)
        if math.isinf(oracle[g]):
            with pytest.raises(NoPath):
                dijkstra_path(grid, s, g)
            continue
        path, cost = dijkstra_path(grid, s, g)
        assert abs(cost - oracle[g]) < 1e-9


def test_dijkstra_path_validity(rng):
    for _ in range(10):
        occ = rng.uniform(size=(15, 15)) < 0.2
        free = np.argwhere(~occ)
        s = tuple(map(int, free[rng.integers(len(free))]))
        g = tuple(map(int, free[rng.integers(len(free))]))
        grid = OccupancyGrid(15, 15, 1.0, Point3(0, 0, 0), occ)
        try:
            path, cost = dijkstra_path(grid, s, g)
        except NoPath:
            continue
        assert path[0] == s and path[-1] == g
        total = 0.0
        for (r0, c0), (r1, c1) in zip(path, path[1:]):
            dr, dc = r1 - r0, c1 - c0
            assert max(abs(dr), abs(dc)) == 1
            assert not occ[r1, c1]
            if dr != 0 and dc != 0:
                assert not occ[r0 + dr, c0] and not occ[r0, c0 + dc]
                total += math.sqrt(2)
            else:
                total += 1.0
        assert abs(total - cost) < 1e-9


def test_dijkstra_deterministic_path(rng):
    occ = rng.uniform(size=(12, 12)) < 0.2
    occ[0, 0] = occ[11, 11] = False
    grid = OccupancyGrid(12, 12, 1.0, Point3(0, 0, 0), occ)
    try:
        p1, c1 = dijkstra_path(grid, (0, 0), (11, 11))
        p2, c2 = dijkstra_path(grid, (0, 0), (11, 11))
    except NoPath:
        return
    assert p1 == p2 and c1 == c2


def test_render_path_marks_endpoints():
    grid = empty_grid(5, 5, 1.0, Point3(0, 0, 0))
    path, _ = dijkstra_path(grid, (0, 0), (4, 4))
    art = render_path(grid, path)
    lines = art.splitlines()
    assert lines[0][0] == "S" and lines[4][4] == "G"
    assert sum(row.count("*") for row in lines) == len(path) - 2
