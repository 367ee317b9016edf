"""
Voxel occupancy grid for the planar workspace.

Occupied cells are closed axis-aligned squares. Every distance this module
reports is an exact point-to-box distance computed by ``box_distances``.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Tuple, Union

import numpy as np
from scipy import ndimage

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

# Grid coordinates closer than this (in cells) to a grid line are snapped onto it.
_SNAP_TOL = 1e-9
# Upper bound on point x box pairs evaluated per vectorized block.
_BLOCK_PAIRS = 2_000_000
# Slack on the distance-field bounds before a point counts as decided.
_FIELD_MARGIN = 1e-9


@dataclass(frozen=True)
class WorkspaceBounds:
    """Axis-aligned workspace extent and voxel resolution."""
    min_corner: Point
    max_corner: Point
    cell_size: float

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if not (self.max_corner[0] > self.min_corner[0] and self.max_corner[1] > self.min_corner[1]):
            raise ValueError(f"workspace max {self.max_corner} must exceed min {self.min_corner}")


@dataclass(frozen=True)
class RectObstacle:
    """Axis-aligned rectangle given by two corners, meters."""
    min_corner: Point
    max_corner: Point

    def __post_init__(self):
        if self.max_corner[0] < self.min_corner[0] or self.max_corner[1] < self.min_corner[1]:
            raise ValueError(f"rectangle max {self.max_corner} below min {self.min_corner}")

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        return (self.min_corner[0], self.min_corner[1], self.max_corner[0], self.max_corner[1])


@dataclass(frozen=True)
class CircleObstacle:
    """Disc with center and radius, meters."""
    center: Point
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"circle radius must be non-negative, got {self.radius}")

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        cx, cy = self.center
        return (cx - self.radius, cy - self.radius, cx + self.radius, cy + self.radius)


Obstacle = Union[RectObstacle, CircleObstacle]


def box_distances(px, py, xmin, ymin, xmax, ymax):
    """
    Euclidean distance from points to closed axis-aligned boxes.

    Broadcasts like any numpy ufunc. Zero for points inside or on a box.
    """
    dx = np.maximum(np.maximum(xmin - px, px - xmax), 0.0)
    dy = np.maximum(np.maximum(ymin - py, py - ymax), 0.0)
    return np.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """
    Immutable 2-D occupancy grid.

    ``occupancy`` has shape (height, width); row j spans y in
    [y_edges[j], y_edges[j + 1]] and column i spans x in [x_edges[i], x_edges[i + 1]].
    """
    origin: Point
    cell_size: float
    width: int
    height: int
    occupancy: np.ndarray

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must have at least one cell, got {self.width}x{self.height}")
        occupancy = np.array(self.occupancy, dtype=bool, copy=True)
        if occupancy.shape != (self.height, self.width):
            raise ValueError(
                f"occupancy shape {occupancy.shape} does not match ({self.height}, {self.width})"
            )
        occupancy.flags.writeable = False
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "occupancy", occupancy)

    @classmethod
    def empty(cls, origin: Point, cell_size: float, width: int, height: int) -> "OccupancyGrid":
        return cls(origin, cell_size, width, height, np.zeros((height, width), dtype=bool))

    @cached_property
    def x_edges(self) -> np.ndarray:
        return self.origin[0] + self.cell_size * np.arange(self.width + 1)

    @cached_property
    def y_edges(self) -> np.ndarray:
        return self.origin[1] + self.cell_size * np.arange(self.height + 1)

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.x_edges[0], self.y_edges[0], self.x_edges[-1], self.y_edges[-1])

    @cached_property
    def occupied_count(self) -> int:
        return int(self.occupancy.sum())

    @property
    def is_empty(self) -> bool:
        return self.occupied_count == 0

    def cell_box(self, i: int, j: int) -> Tuple[float, float, float, float]:
        """Closed square of column i, row j as (xmin, ymin, xmax, ymax)."""
        return (self.x_edges[i], self.y_edges[j], self.x_edges[i + 1], self.y_edges[j + 1])

    def _boxes_of(self, mask: np.ndarray) -> np.ndarray:
        rows, cols = np.nonzero(mask)
        boxes = np.column_stack(
            [self.x_edges[cols], self.y_edges[rows], self.x_edges[cols + 1], self.y_edges[rows + 1]]
        )
        boxes.flags.writeable = False
        return boxes

    @cached_property
    def occupied_boxes(self) -> np.ndarray:
        """(K, 4) array of every occupied cell as (xmin, ymin, xmax, ymax), row-major order."""
        return self._boxes_of(self.occupancy)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Occupied cells with at least one free (or out-of-grid) 4-neighbour."""
        padded = np.pad(self.occupancy, 1, constant_values=False)
        interior = (
            self.occupancy
            & padded[:-2, 1:-1]
            & padded[2:, 1:-1]
            & padded[1:-1, :-2]
            & padded[1:-1, 2:]
        )
        return self.occupancy & ~interior

    @cached_property
    def boundary_boxes(self) -> np.ndarray:
        return self._boxes_of(self.boundary_mask)

    @cached_property
    def center_distance_field(self) -> np.ndarray:
        """
        Per cell, meters from its center to the nearest occupied cell center.

        Zero on occupied cells. For a point p in cell c the nearest occupied
        box lies within [field[c] - sqrt(2) * cell_size, field[c] + cell_size / sqrt(2)].
        """
        if self.is_empty:
            return np.full(self.occupancy.shape, np.inf)
        field = ndimage.distance_transform_edt(~self.occupancy, sampling=self.cell_size)
        field.flags.writeable = False
        return field

    def cell_indices(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Column and row index of the cell whose half-open square holds each point."""
        ix = np.floor((points[:, 0] - self.origin[0]) / self.cell_size).astype(np.int64)
        iy = np.floor((points[:, 1] - self.origin[1]) / self.cell_size).astype(np.int64)
        return ix, iy


def _as_points(points) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 2)


def _window_min_distances(grid: OccupancyGrid, points: np.ndarray, reach: int) -> np.ndarray:
    """Minimum box distance over occupied cells within ``reach`` cells of each point's cell."""
    n = len(points)
    out = np.full(n, np.inf)
    if n == 0 or grid.is_empty:
        return out
    offsets = np.arange(-reach, reach + 1)
    window = len(offsets) ** 2
    block = max(1, _BLOCK_PAIRS // window)
    for start in range(0, n, block):
        pts = points[start:start + block]
        ix, iy = grid.cell_indices(pts)
        cx = ix[:, None, None] + offsets[None, None, :]
        cy = iy[:, None, None] + offsets[None, :, None]
        cx, cy = np.broadcast_arrays(cx, cy)
        inside = (cx >= 0) & (cx < grid.width) & (cy >= 0) & (cy < grid.height)
        occupied = np.zeros(cx.shape, dtype=bool)
        occupied[inside] = grid.occupancy[cy[inside], cx[inside]]
        owner, _, _ = np.nonzero(occupied)
        if owner.size == 0:
            continue
        ocx = cx[occupied]
        ocy = cy[occupied]
        dist = box_distances(
            pts[owner, 0], pts[owner, 1],
            grid.x_edges[ocx], grid.y_edges[ocy], grid.x_edges[ocx + 1], grid.y_edges[ocy + 1],
        )
        chunk = out[start:start + block]
        np.minimum.at(chunk, owner, dist)
    return out


def nearest_occupied_distances(grid: OccupancyGrid, points) -> np.ndarray:
    """
    Exact distance from each point to the nearest occupied cell.

    Returns ``inf`` for every point when the grid has no occupied cell.
    A point outside the union of occupied cells is nearest to a boundary cell;
    a point inside is caught by its own 3x3 neighbourhood, so the minimum over
    both candidate sets equals the minimum over all occupied cells.
    """
    pts = _as_points(points)
    n = len(pts)
    if grid.is_empty:
        return np.full(n, np.inf)
    boxes = grid.boundary_boxes
    out = np.empty(n)
    block = max(1, _BLOCK_PAIRS // len(boxes))
    for start in range(0, n, block):
        pts_block = pts[start:start + block]
        dist = box_distances(
            pts_block[:, :1], pts_block[:, 1:],
            boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3],
        )
        out[start:start + block] = dist.min(axis=1)
    return np.minimum(out, _window_min_distances(grid, pts, reach=1))


def nearest_occupied_distance(grid: OccupancyGrid, p: Point) -> float:
    """Exact distance from one point to the nearest occupied cell, ``math.inf`` on an empty grid."""
    return float(nearest_occupied_distances(grid, [p])[0])


def occupied_within(grid: OccupancyGrid, points, radius: float) -> np.ndarray:
    """
    True for each point whose nearest occupied cell is at distance <= radius.

    Points inside the grid are first decided from ``center_distance_field``;
    only those whose bounds straddle ``radius`` (and points outside the grid)
    get the exact box scan over cells within reach. The answer is the same as
    comparing ``nearest_occupied_distances`` against radius.
    """
    pts = _as_points(points)
    n = len(pts)
    if grid.is_empty or n == 0:
        return np.zeros(n, dtype=bool)

    ix, iy = grid.cell_indices(pts)
    inside = (ix >= 0) & (ix < grid.width) & (iy >= 0) & (iy < grid.height)
    field = np.full(n, np.nan)
    field[inside] = grid.center_distance_field[iy[inside], ix[inside]]
    half_diagonal = grid.cell_size * math.sqrt(0.5)
    hit = inside & (field + half_diagonal < radius - _FIELD_MARGIN)
    clear = inside & (field - 2.0 * half_diagonal > radius + _FIELD_MARGIN)

    result = hit
    undecided = ~(hit | clear)
    if undecided.any():
        reach = int(math.ceil(radius / grid.cell_size)) + 2
        result[undecided] = _window_min_distances(grid, pts[undecided], reach) <= radius
    return result


def _snap(u: float) -> float:
    nearest = round(u)
    return float(nearest) if abs(u - nearest) <= _SNAP_TOL else u


def _index_range(lo: float, hi: float, origin: float, cell_size: float, closed: bool, limit: int):
    u_lo = _snap((lo - origin) / cell_size)
    u_hi = _snap((hi - origin) / cell_size)
    if closed:
        first, last = math.ceil(u_lo) - 1, math.floor(u_hi)
    else:
        first, last = math.floor(u_lo), math.ceil(u_hi) - 1
    return max(first, 0), min(last, limit - 1)


def _rasterize_rect(grid_occ: np.ndarray, rect: RectObstacle, origin: Point, cell_size: float) -> None:
    x0, y0, x1, y1 = rect.bbox
    # Shapes with area occupy the cells their interior meets; degenerate ones the cells they touch.
    closed = not (x1 > x0 and y1 > y0)
    height, width = grid_occ.shape
    i0, i1 = _index_range(x0, x1, origin[0], cell_size, closed, width)
    j0, j1 = _index_range(y0, y1, origin[1], cell_size, closed, height)
    if i0 <= i1 and j0 <= j1:
        grid_occ[j0:j1 + 1, i0:i1 + 1] = True


def _rasterize_circle(grid_occ: np.ndarray, circle: CircleObstacle,
                      x_edges: np.ndarray, y_edges: np.ndarray, origin: Point, cell_size: float) -> None:
    cx, cy = circle.center
    r = circle.radius
    height, width = grid_occ.shape
    i0 = max(math.floor((cx - r - origin[0]) / cell_size) - 1, 0)
    i1 = min(math.floor((cx + r - origin[0]) / cell_size) + 1, width - 1)
    j0 = max(math.floor((cy - r - origin[1]) / cell_size) - 1, 0)
    j1 = min(math.floor((cy + r - origin[1]) / cell_size) + 1, height - 1)
    if i0 > i1 or j0 > j1:
        return
    cols = np.arange(i0, i1 + 1)
    rows = np.arange(j0, j1 + 1)
    dist = box_distances(
        cx, cy,
        x_edges[cols][None, :], y_edges[rows][:, None],
        x_edges[cols + 1][None, :], y_edges[rows + 1][:, None],
    )
    hit = dist < r if r > 0 else dist <= 0.0
    grid_occ[j0:j1 + 1, i0:i1 + 1] |= hit


def rasterize_obstacles(bounds: WorkspaceBounds, obstacles: Iterable[Obstacle],
                        cell_size: float = None) -> OccupancyGrid:
    """Conservatively rasterize obstacle shapes into a grid covering ``bounds``."""
    cell_size = bounds.cell_size if cell_size is None else cell_size
    origin = bounds.min_corner
    width = max(1, math.ceil((bounds.max_corner[0] - origin[0]) / cell_size - _SNAP_TOL))
    height = max(1, math.ceil((bounds.max_corner[1] - origin[1]) / cell_size - _SNAP_TOL))
    x_edges = origin[0] + cell_size * np.arange(width + 1)
    y_edges = origin[1] + cell_size * np.arange(height + 1)
    occupancy = np.zeros((height, width), dtype=bool)

    for index, obstacle in enumerate(obstacles):
        before = int(occupancy.sum())
        if isinstance(obstacle, RectObstacle):
            _rasterize_rect(occupancy, obstacle, origin, cell_size)
        elif isinstance(obstacle, CircleObstacle):
            _rasterize_circle(occupancy, obstacle, x_edges, y_edges, origin, cell_size)
        else:
            raise TypeError(f"unsupported obstacle type {type(obstacle).__name__}")
        x0, y0, x1, y1 = obstacle.bbox
        if x0 < x_edges[0] or y0 < y_edges[0] or x1 > x_edges[-1] or y1 > y_edges[-1]:
            logger.warning("Obstacle %d extends beyond the workspace and is clipped", index)
        if int(occupancy.sum()) == before:
            logger.debug("Obstacle %d added no new cells", index)

    return OccupancyGrid(origin, cell_size, width, height, occupancy)


def rasterize(scenario, cell_size: float = None) -> OccupancyGrid:
    """
    Rasterize a scenario's obstacles.

    Args:
        scenario: Scenario providing ``workspace`` bounds and ``obstacles``
        cell_size: Optional override of the scenario's resolution

    Returns:
        OccupancyGrid covering the scenario bounds
    """
    grid = rasterize_obstacles(scenario.workspace, scenario.obstacles, cell_size)
    logger.info(
        "Rasterized '%s': %dx%d cells at %.4f m, %d occupied",
        scenario.name, grid.width, grid.height, grid.cell_size, grid.occupied_count,
    )
    return grid
