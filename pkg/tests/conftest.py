"""
Shared fixtures and brute-force oracles for the planner tests.
"""
import heapq
import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

SCRIPTS_DIR = Path(__file__).resolve().parent.parent / "scripts"
sys.path.insert(0, str(SCRIPTS_DIR))

from primitives.generators import ExpansionContext, make_generator  # noqa: E402
from primitives.lattice import GOAL_KEY, PrimitiveMode, PrimitiveParams  # noqa: E402
from robot.chain import KinematicChain, SphereChainModel, sphere_centers_batch  # noqa: E402
from workspace.grid import OccupancyGrid, box_distances  # noqa: E402
from workspace.scenario import ScenarioParser  # noqa: E402

PROJECT_ROOT = SCRIPTS_DIR.parent
SCENARIOS_DIR = PROJECT_ROOT / "data" / "scenarios"
TEMPLATES_DIR = SCRIPTS_DIR / "templates"


def scenario_data(name="test_scenario", obstacles=(), start_deg=(0, 0), goal_deg=(0, 0),
                  link_lengths=(0.5, 0.4), cell_size=0.05, spheres_per_link=11,
                  sphere_radius=0.05, extent=1.2, tier="EASY"):
    """A scenario mapping in the on-disk layout."""
    return {
        "schema_version": 1,
        "name": name,
        "tier": tier,
        "workspace": {"min": [-extent, -extent], "max": [extent, extent], "cell_size": cell_size},
        "obstacles": [dict(o) for o in obstacles],
        "robot": {
            "base": [0.0, 0.0],
            "link_lengths": list(link_lengths),
            "sphere_radius": sphere_radius,
            "spheres_per_link": spheres_per_link,
            "joint_limits_deg": [[-180, 180] for _ in link_lengths],
        },
        "start_deg": list(start_deg),
        "goal_deg": list(goal_deg),
    }


def make_scenario(**kwargs):
    return ScenarioParser().parse_mapping(scenario_data(**kwargs))


def brute_force_nearest(grid: OccupancyGrid, points) -> np.ndarray:
    """Minimum box distance over every occupied cell, one point at a time."""
    boxes = grid.occupied_boxes
    out = []
    for x, y in np.asarray(points, dtype=float).reshape(-1, 2):
        if len(boxes) == 0:
            out.append(math.inf)
            continue
        out.append(float(np.min(box_distances(x, y, boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3]))))
    return np.array(out)


def brute_force_clearance(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid, q) -> float:
    """Exhaustive (sphere x occupied cell) minimum of the surface distance, clamped at 0."""
    centers = sphere_centers_batch(chain, model, q)[0]
    best = math.inf
    for center in centers:
        for xmin, ymin, xmax, ymax in grid.occupied_boxes:
            d = float(box_distances(center[0], center[1], xmin, ymin, xmax, ymax)) - model.radius
            best = min(best, d)
    return max(0.0, best)


def brute_force_moment_arm(chain: KinematicChain, model: SphereChainModel, q, i: int) -> float:
    """Max distance from joint i's pivot to a distal sphere surface, in world coordinates."""
    q = np.asarray(q, dtype=float)
    phi = np.cumsum(q)
    pivot = np.array(chain.base, dtype=float)
    for k in range(i - 1):
        pivot = pivot + chain.link_lengths[k] * np.array([math.cos(phi[k]), math.sin(phi[k])])
    centers = sphere_centers_batch(chain, model, q)[0]
    distal = model.link_index >= i - 1
    return max(float(np.linalg.norm(c - pivot)) + model.radius for c in centers[distal])


def lattice_dijkstra(problem, m_prim: float, mode: PrimitiveMode = PrimitiveMode.FIXED,
                     snap_radius=None) -> float:
    """
    Optimal cost over the exact successor graph the planner searches.

    Uses the same successor generator and goal connection, so the value is
    the lattice optimum c* for that mode.
    """
    kwargs = {} if snap_radius is None else {"snap_radius": snap_radius}
    params = PrimitiveParams(m_prim=m_prim, mode=mode, **kwargs)
    ctx = ExpansionContext.create(problem.chain, problem.model, problem.grid, problem.q_start,
                                  params, problem.clearance_cap)
    generator = make_generator(ctx)
    q_goal = problem.q_goal
    on_lattice = ctx.lattice.coord_of(q_goal)
    goal_key = GOAL_KEY if on_lattice is None else on_lattice

    start = tuple(0 for _ in range(problem.dof))
    dist = {start: 0.0}
    counter = itertools.count()
    heap = [(0.0, next(counter), start)]
    done = set()
    while heap:
        d, _, key = heapq.heappop(heap)
        if key in done:
            continue
        done.add(key)
        if key == goal_key:
            return d
        q = ctx.lattice.config(key)
        entries = list(generator.expand(q, key).successors)
        snap = generator.snap(q, q_goal, goal_key)
        if snap is not None:
            entries.append(snap)
        for entry in entries:
            candidate = d + entry.cost
            if candidate < dist.get(entry.coord, math.inf):
                dist[entry.coord] = candidate
                heapq.heappush(heap, (candidate, next(counter), entry.coord))
    return math.inf


@pytest.fixture
def empty_grid():
    return OccupancyGrid.empty((-3.0, -3.0), 0.1, 60, 60)


@pytest.fixture
def two_link_chain():
    return KinematicChain((1.0, 1.0))


@pytest.fixture
def tip_sphere_model(two_link_chain):
    """One sphere of radius 0.1 at each link tip."""
    return SphereChainModel(two_link_chain.link_lengths, ((1.0,), (1.0,)), 0.1)


@pytest.fixture
def arm_scenario():
    """2-DoF arm with one obstacle above the base, coarse grid."""
    return make_scenario(
        name="arm",
        obstacles=[{"type": "circle", "center": [0.0, 0.75], "radius": 0.1}],
        start_deg=(0, 0),
        goal_deg=(150, -30),
    )
