"""
Clearance, collision and moment-arm queries for the sphere chain.

Touching counts as collision: a sphere whose center is exactly one radius
from an occupied cell is in collision.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from workspace.grid import OccupancyGrid, nearest_occupied_distances, occupied_within
from .chain import KinematicChain, RobotModelError, SphereChainModel, sphere_centers_batch

logger = logging.getLogger(__name__)

DEFAULT_CLEARANCE_CAP = 1.0
# Configurations checked per vectorized batch along an edge.
_EDGE_BATCH = 64


@dataclass(frozen=True)
class ClearanceResult:
    """Minimum sphere-surface clearance d_c and the collision flag."""
    d_c: float
    in_collision: bool


def sphere_distances(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid, q) -> np.ndarray:
    """Distance from every sphere center to its nearest occupied cell."""
    centers = sphere_centers_batch(chain, model, q)[0]
    return nearest_occupied_distances(grid, centers)


def clearance(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid, q,
              clearance_cap: float = DEFAULT_CLEARANCE_CAP) -> ClearanceResult:
    """
    Minimum clearance between the sphere surfaces and the occupied cells.

    d_c = max(0, min_s(dist_s - radius)); an obstacle-free grid reports the cap.
    """
    dist = sphere_distances(chain, model, grid, q)
    if dist.size == 0 or not np.isfinite(dist).any():
        return ClearanceResult(d_c=float(clearance_cap), in_collision=False)
    surface = dist.min() - model.radius
    return ClearanceResult(
        d_c=max(0.0, float(surface)),
        in_collision=bool(surface <= 0.0),
    )


def configurations_in_collision(chain: KinematicChain, model: SphereChainModel,
                                grid: OccupancyGrid, qs) -> np.ndarray:
    """Boolean collision flag for each of M configurations."""
    centers = sphere_centers_batch(chain, model, qs)
    hits = occupied_within(grid, centers.reshape(-1, 2), model.radius)
    return hits.reshape(centers.shape[0], centers.shape[1]).any(axis=1)


def in_collision(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid, q) -> bool:
    return bool(configurations_in_collision(chain, model, grid, q)[0])


def moment_arm(chain: KinematicChain, model: SphereChainModel, q, i: int) -> float:
    """
    Largest distance from joint i's pivot to any distal sphere surface.

    Computed in the pivot's own frame, so it depends only on q_{i+1}..q_n.

    Args:
        i: joint index, 1-based

    Raises:
        RobotModelError: if i is out of range
    """
    q = chain.check_dimension(q)
    if not 1 <= i <= chain.dof:
        raise RobotModelError(f"joint index {i} out of range 1..{chain.dof}")
    start = i - 1
    lengths = np.asarray(chain.link_lengths[start:])
    angles = np.cumsum(np.concatenate([[0.0], q[start + 1:]]))
    segments = np.stack([np.cos(angles), np.sin(angles)], axis=-1) * lengths[:, None]
    link_starts = np.vstack([np.zeros((1, 2)), np.cumsum(segments, axis=0)[:-1]])

    distal = model.link_index >= start
    links = model.link_index[distal] - start
    centers = link_starts[links] + segments[links] * model.fraction_array[distal][:, None]
    return float(np.max(np.sqrt(np.sum(centers * centers, axis=1))) + model.radius)


def moment_arms(chain: KinematicChain, model: SphereChainModel, q) -> np.ndarray:
    """r_1..r_n for one configuration."""
    return np.array([moment_arm(chain, model, q, i) for i in range(1, chain.dof + 1)])


def default_interpolation_step(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid) -> float:
    """
    Joint step that moves no sphere surface by more than one cell per sample.

    Uses the configuration-independent bound r_i <= total reach + radius.
    """
    return grid.cell_size / (chain.reach + model.radius)


def interpolate(q_a, q_b, step: float) -> np.ndarray:
    """Samples from q_a to q_b inclusive, consecutive samples at most ``step`` apart in the inf-norm."""
    if not step > 0:
        raise ValueError(f"interpolation step must be positive, got {step}")
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    span = float(np.max(np.abs(q_b - q_a))) if q_a.size else 0.0
    segments = max(1, math.ceil(span / step))
    t = np.linspace(0.0, 1.0, segments + 1)[:, None]
    return q_a[None, :] + t * (q_b - q_a)[None, :]


def motion_collision_check(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid,
                           q_a, q_b, step: float = None) -> bool:
    """
    Check the straight C-space edge q_a -> q_b by dense sampling.

    Returns:
        True when every sample is collision-free
    """
    q_a = chain.check_dimension(q_a)
    q_b = chain.check_dimension(q_b)
    if step is None:
        step = default_interpolation_step(chain, model, grid)
    if grid.is_empty:
        return True
    samples = interpolate(q_a, q_b, step)
    for start in range(0, len(samples), _EDGE_BATCH):
        if configurations_in_collision(chain, model, grid, samples[start:start + _EDGE_BATCH]).any():
            return False
    return True
