import math

import numpy as np
import pytest

from conftest import brute_force_nearest
from workspace.grid import (
    CircleObstacle,
    OccupancyGrid,
    RectObstacle,
    WorkspaceBounds,
    nearest_occupied_distance,
    nearest_occupied_distances,
    occupied_within,
    rasterize_obstacles,
)

UNIT = WorkspaceBounds((0.0, 0.0), (1.0, 1.0), 0.1)


def occupied_cells(grid):
    rows, cols = np.nonzero(grid.occupancy)
    return {(int(c), int(r)) for r, c in zip(rows, cols)}


def test_no_obstacles_leaves_every_cell_free():
    grid = rasterize_obstacles(UNIT, [])
    assert grid.width == 10 and grid.height == 10
    assert grid.is_empty


def test_aligned_rectangle_occupies_exactly_its_cells():
    grid = rasterize_obstacles(UNIT, [RectObstacle((0.3, 0.2), (0.6, 0.5))])
    assert occupied_cells(grid) == {(i, j) for i in range(3, 6) for j in range(2, 5)}


def test_circle_on_cell_corner_occupies_the_four_sharing_cells():
    grid = rasterize_obstacles(UNIT, [CircleObstacle((0.5, 0.5), 0.05)])
    assert occupied_cells(grid) == {(4, 4), (5, 4), (4, 5), (5, 5)}


def test_circle_rasterization_matches_subsampling():
    circle = CircleObstacle((0.5, 0.5), 0.05)
    grid = rasterize_obstacles(UNIT, [circle])
    u = (np.arange(100) + 0.5) / 100.0
    for i in range(grid.width):
        for j in range(grid.height):
            xs = (i + u) * 0.1
            ys = (j + u) * 0.1
            xx, yy = np.meshgrid(xs, ys)
            inside = np.any((xx - 0.5) ** 2 + (yy - 0.5) ** 2 < 0.05 ** 2)
            assert bool(grid.occupancy[j, i]) == bool(inside)


def test_degenerate_rectangle_occupies_touched_cells():
    grid = rasterize_obstacles(UNIT, [RectObstacle((0.35, 0.35), (0.35, 0.35))])
    assert occupied_cells(grid) == {(3, 3)}


def test_rasterization_is_conservative():
    rng = np.random.default_rng(3)
    shapes = [
        RectObstacle((0.12, 0.33), (0.47, 0.41)),
        CircleObstacle((0.71, 0.64), 0.13),
        RectObstacle((0.8, 0.05), (0.83, 0.29)),
    ]
    grid = rasterize_obstacles(UNIT, shapes)
    for shape in shapes:
        x0, y0, x1, y1 = shape.bbox
        pts = rng.uniform([x0, y0], [x1, y1], size=(500, 2))
        if isinstance(shape, CircleObstacle):
            pts = pts[np.hypot(pts[:, 0] - shape.center[0], pts[:, 1] - shape.center[1]) < shape.radius]
        assert np.all(nearest_occupied_distances(grid, pts) == 0.0)


def test_empty_grid_distance_is_unbounded():
    grid = OccupancyGrid.empty((0.0, 0.0), 0.1, 5, 5)
    assert math.isinf(nearest_occupied_distance(grid, (0.3, 0.3)))
    assert not occupied_within(grid, [(0.3, 0.3)], 10.0).any()


def test_single_cell_axis_aligned_gap():
    grid = OccupancyGrid((0.0, 0.0), 0.1, 3, 1, np.array([[True, False, False]]))
    assert nearest_occupied_distance(grid, (0.2, 0.05)) == pytest.approx(0.1)
    assert nearest_occupied_distance(grid, (0.05, 0.05)) == 0.0
    assert nearest_occupied_distance(grid, (0.1, 0.1)) == 0.0


def test_distance_outside_the_grid():
    grid = OccupancyGrid((0.0, 0.0), 0.1, 3, 1, np.array([[True, False, False]]))
    assert nearest_occupied_distance(grid, (-0.3, 0.5)) == pytest.approx(math.hypot(0.3, 0.4))


def test_distance_matches_exhaustive_oracle():
    rng = np.random.default_rng(11)
    occupancy = np.zeros((20, 20), dtype=bool)
    occupancy.flat[rng.choice(400, size=40, replace=False)] = True
    grid = OccupancyGrid((-1.0, -1.0), 0.1, 20, 20, occupancy)
    points = rng.uniform(-1.5, 1.5, size=(100, 2))
    np.testing.assert_array_equal(nearest_occupied_distances(grid, points), brute_force_nearest(grid, points))


def test_distance_inside_a_solid_block_is_zero():
    occupancy = np.zeros((10, 10), dtype=bool)
    occupancy[2:8, 2:8] = True
    grid = OccupancyGrid((0.0, 0.0), 0.1, 10, 10, occupancy)
    assert nearest_occupied_distance(grid, (0.5, 0.5)) == 0.0


def test_distance_is_one_lipschitz():
    rng = np.random.default_rng(5)
    occupancy = rng.random((15, 15)) < 0.1
    grid = OccupancyGrid((0.0, 0.0), 0.1, 15, 15, occupancy)
    a = rng.uniform(-0.5, 2.0, size=(200, 2))
    b = a + rng.normal(scale=0.2, size=(200, 2))
    gap = np.abs(nearest_occupied_distances(grid, a) - nearest_occupied_distances(grid, b))
    assert np.all(gap <= np.linalg.norm(a - b, axis=1) + 1e-12)


def test_occupied_within_agrees_with_distances():
    rng = np.random.default_rng(8)
    occupancy = rng.random((12, 12)) < 0.08
    grid = OccupancyGrid((0.0, 0.0), 0.1, 12, 12, occupancy)
    points = rng.uniform(-0.2, 1.4, size=(300, 2))
    for radius in (0.0, 0.05, 0.17, 0.4):
        expected = nearest_occupied_distances(grid, points) <= radius
        np.testing.assert_array_equal(occupied_within(grid, points, radius), expected)


def test_distance_field_brackets_exact_distances():
    rng = np.random.default_rng(17)
    occupancy = rng.random((30, 30)) < 0.03
    grid = OccupancyGrid((-0.15, -0.15), 0.01, 30, 30, occupancy)
    points = rng.uniform(-0.15, 0.1499, size=(400, 2))
    ix, iy = grid.cell_indices(points)
    field = grid.center_distance_field[iy, ix]
    exact = brute_force_nearest(grid, points)
    assert np.all(exact >= field - math.sqrt(2.0) * 0.01 - 1e-12)
    assert np.all(exact <= field + 0.01 / math.sqrt(2.0) + 1e-12)


def test_occupied_within_on_a_fine_grid_matches_oracle():
    rng = np.random.default_rng(23)
    bounds = WorkspaceBounds((-0.5, -0.5), (0.5, 0.5), 0.01)
    grid = rasterize_obstacles(bounds, [
        CircleObstacle((0.1, 0.2), 0.08),
        RectObstacle((-0.4, -0.3), (-0.25, 0.1)),
    ])
    points = rng.uniform(-0.6, 0.6, size=(500, 2))
    exact = brute_force_nearest(grid, points)
    for radius in (0.0, 0.03, 0.05, 0.2):
        np.testing.assert_array_equal(occupied_within(grid, points, radius), exact <= radius)


def test_occupied_within_counts_touching():
    grid = OccupancyGrid((0.0, 0.0), 0.1, 3, 1, np.array([[True, False, False]]))
    assert occupied_within(grid, [(0.15, 0.05)], 0.05).all()
    assert not occupied_within(grid, [(0.15, 0.05)], 0.0499).any()
    assert grid.center_distance_field[0].tolist() == pytest.approx([0.0, 0.1, 0.2])


def test_grid_rejects_bad_shapes():
    with pytest.raises(ValueError):
        OccupancyGrid((0.0, 0.0), 0.0, 1, 1, np.zeros((1, 1), dtype=bool))
    with pytest.raises(ValueError):
        OccupancyGrid((0.0, 0.0), 0.1, 2, 2, np.zeros((3, 2), dtype=bool))
    with pytest.raises(ValueError):
        WorkspaceBounds((0.0, 0.0), (0.0, 1.0), 0.1)
