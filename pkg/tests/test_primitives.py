import math

import numpy as np
import pytest

from primitives.generators import (
    BurPrimitiveGenerator,
    ExpansionContext,
    FixedPrimitiveGenerator,
    bur_successors,
    discretize_spine,
    fixed_successors,
    goal_snap,
    make_generator,
    spine_length,
    spine_steps,
)
from primitives.lattice import (
    GOAL_KEY,
    Lattice,
    PrimitiveMode,
    PrimitiveParams,
    Provenance,
    joint_directions,
)
from robot.chain import KinematicChain, SphereChainModel, sphere_centers_batch
from robot.collision import in_collision, interpolate, moment_arm
from workspace.grid import CircleObstacle, WorkspaceBounds, rasterize_obstacles

M4 = math.radians(4.0)


def context(chain, model, grid, q_start=None, **params):
    q_start = tuple(0.0 for _ in range(chain.dof)) if q_start is None else q_start
    return ExpansionContext.create(chain, model, grid, q_start, PrimitiveParams(**params))


def test_spine_length_examples():
    assert spine_length(0.2, 2.0) == pytest.approx(0.1)
    assert spine_length(0.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        spine_length(0.2, 0.0)


def test_spine_rotation_moves_no_sphere_further_than_clearance():
    rng = np.random.default_rng(29)
    chain = KinematicChain((0.25,) * 7)
    model = SphereChainModel.evenly_spaced(chain, 0.05, spheres_per_link=4)
    for _ in range(20):
        q = rng.uniform(-math.pi, math.pi, size=7)
        i = int(rng.integers(1, 8))
        d_c = float(rng.uniform(0.01, 0.5))
        angle = spine_length(d_c, moment_arm(chain, model, q, i))
        end = q.copy()
        end[i - 1] += angle
        centers = sphere_centers_batch(chain, model, interpolate(q, end, angle / 100.0 + 1e-12))
        displacement = np.linalg.norm(centers - centers[0][None], axis=-1)
        assert displacement.max() <= d_c + 1e-12


@pytest.mark.parametrize("raw, expected", [
    (0.1, 0.069813170079773),
    (M4, M4),
    (0.05, 0.0),
])
def test_discretize_spine(raw, expected):
    assert discretize_spine(raw, M4) == pytest.approx(expected, abs=1e-12)


def test_spine_steps_floor():
    assert spine_steps(0.2 / 1.1, M4) == 2
    assert spine_steps(0.2 / 2.1, M4) == 1
    assert spine_steps(0.0, M4) == 0


def test_fixed_primitives_on_empty_grid(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4, mode=PrimitiveMode.FIXED)
    successors = fixed_successors((0.0, 0.0), (0, 0), ctx)
    assert len(successors) == 4
    assert all(e.cost == M4 and e.provenance == Provenance.FIXED for e in successors)
    assert {e.coord for e in successors} == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_fixed_primitives_seven_dof(empty_grid):
    chain = KinematicChain((0.25,) * 7)
    model = SphereChainModel.evenly_spaced(chain, 0.05, spheres_per_link=4)
    ctx = context(chain, model, empty_grid, m_prim=M4)
    assert len(fixed_successors(np.zeros(7), (0,) * 7, ctx)) == 14


def test_fixed_primitive_at_upper_limit_is_dropped(tip_sphere_model, empty_grid):
    chain = KinematicChain((1.0, 1.0), joint_limits=((-math.pi, 0.0), (-math.pi, math.pi)))
    ctx = context(chain, tip_sphere_model, empty_grid, m_prim=M4)
    coords = {e.coord for e in fixed_successors((0.0, 0.0), (0, 0), ctx)}
    assert coords == {(-1, 0), (0, 1), (0, -1)}


def test_bur_falls_back_below_d_crit(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4)
    bur = bur_successors((0.0, 0.0), (0, 0), 0.02, ctx)
    fixed = fixed_successors((0.0, 0.0), (0, 0), ctx)
    assert bur.signature() == fixed.signature()


def test_bur_spines_scale_with_moment_arm(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4, first_step=False)
    successors = bur_successors((0.0, 0.0), (0, 0), 0.2, ctx)
    assert [e.coord for e in successors] == [(1, 0), (-1, 0), (0, 2), (0, -2)]
    assert [e.cost for e in successors] == pytest.approx([M4, M4, 2 * M4, 2 * M4])
    assert set(successors.provenances()) == {Provenance.BUR}


def test_bur_spines_keep_their_first_step_by_default(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4)
    successors = bur_successors((0.0, 0.0), (0, 0), 0.2, ctx)
    assert [e.coord for e in successors] == [(1, 0), (-1, 0), (0, 1), (0, 2), (0, -1), (0, -2)]
    assert [e.cost for e in successors] == pytest.approx([M4, M4, M4, 2 * M4, M4, 2 * M4])
    assert set(successors.provenances()) == {Provenance.BUR}


def test_bur_lattice_contains_every_free_fixed_edge():
    rng = np.random.default_rng(37)
    chain = KinematicChain((0.5, 0.4))
    model = SphereChainModel.evenly_spaced(chain, 0.05, spheres_per_link=11)
    bounds = WorkspaceBounds((-1.2, -1.2), (1.2, 1.2), 0.02)
    grid = rasterize_obstacles(bounds, [CircleObstacle((0.3, 0.6), 0.1), CircleObstacle((-0.5, -0.2), 0.15)])
    fixed = make_generator(context(chain, model, grid, m_prim=M4, mode=PrimitiveMode.FIXED))
    bur = make_generator(context(chain, model, grid, m_prim=M4))
    checked = 0
    for _ in range(40):
        coord = tuple(int(v) for v in rng.integers(-40, 41, size=2))
        q = bur.ctx.lattice.config(coord)
        if bur.ctx.chain.within_limits(q) and not in_collision(chain, model, grid, q):
            fixed_coords = {e.coord for e in fixed.expand(q, coord).successors}
            assert fixed_coords <= {e.coord for e in bur.expand(q, coord).successors}
            checked += 1
    assert checked > 10


def test_bur_intermediate_nodes(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4, intermediate_nodes=True)
    coords = [e.coord for e in bur_successors((0.0, 0.0), (0, 0), 0.2, ctx)]
    assert coords == [(1, 0), (-1, 0), (0, 1), (0, 2), (0, -1), (0, -2)]


def test_short_spine_falls_back_per_direction(two_link_chain, tip_sphere_model, empty_grid):
    # d_c / r_1 is shorter than one 5 deg step, d_c / r_2 is longer.
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=math.radians(5.0))
    successors = bur_successors((0.0, 0.0), (0, 0), 0.16, ctx)
    by_joint = {e.coord: e.provenance for e in successors}
    assert by_joint[(1, 0)] == Provenance.FIXED
    assert by_joint[(-1, 0)] == Provenance.FIXED
    assert by_joint[(0, 1)] == Provenance.BUR
    assert by_joint[(0, -1)] == Provenance.BUR


def test_bur_spine_clipped_at_joint_limit(tip_sphere_model, empty_grid):
    limit = 2.5 * M4
    chain = KinematicChain((1.0, 1.0), joint_limits=((-math.pi, math.pi), (-math.pi, limit)))
    ctx = context(chain, tip_sphere_model, empty_grid, m_prim=M4)
    successors = bur_successors((0.0, 0.0), (0, 0), 0.5, ctx)
    coords = {e.coord for e in successors}
    assert (0, 2) in coords
    assert all(chain.within_limits(e.q) for e in successors)


def test_every_direction_blocked_gives_empty_set(empty_grid):
    chain = KinematicChain((1.0,), joint_limits=((-0.01, 0.01),))
    model = SphereChainModel((1.0,), ((1.0,),), 0.1)
    ctx = context(chain, model, empty_grid, m_prim=M4)
    assert len(bur_successors((0.0,), (0,), 0.5, ctx)) == 0
    assert len(bur_successors((0.0,), (0,), 0.01, ctx)) == 0


def test_non_snap_successors_stay_on_lattice():
    rng = np.random.default_rng(31)
    chain = KinematicChain((0.5, 0.4))
    model = SphereChainModel.evenly_spaced(chain, 0.05, spheres_per_link=11)
    bounds = WorkspaceBounds((-1.2, -1.2), (1.2, 1.2), 0.02)
    grid = rasterize_obstacles(bounds, [CircleObstacle((0.3, 0.6), 0.1)])
    ctx = context(chain, model, grid, m_prim=M4)
    generator = make_generator(ctx)
    for _ in range(15):
        coord = tuple(int(v) for v in rng.integers(-40, 41, size=2))
        q = ctx.lattice.config(coord)
        for entry in generator.expand(q, coord).successors:
            diff = np.asarray(entry.coord) - np.asarray(coord)
            assert np.count_nonzero(diff) == 1
            assert entry.cost == pytest.approx(abs(diff).sum() * M4)
            np.testing.assert_allclose(entry.q, ctx.lattice.config(entry.coord))


def test_goal_snap_at_the_goal_costs_nothing(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4)
    entry = goal_snap((0.1, 0.2), (0.1, 0.2), ctx)
    assert entry.cost == 0.0 and entry.coord == GOAL_KEY and entry.provenance == Provenance.GOAL_SNAP


def test_goal_snap_gate(two_link_chain, tip_sphere_model, empty_grid):
    ctx = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4)
    assert goal_snap((0.0, 0.0), (2.1 * M4, 0.0), ctx) is None
    entry = goal_snap((0.0, 0.0), (1.5 * M4, 2.0 * M4), ctx)
    assert entry.cost == pytest.approx(2.5 * M4)
    ungated = context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4, snap_radius=math.inf)
    assert goal_snap((0.0, 0.0), (2.0, -1.0), ungated) is not None


def test_goal_snap_blocked_by_obstacle():
    chain = KinematicChain((1.0,))
    model = SphereChainModel.evenly_spaced(chain, 0.05)
    center = (0.6 * math.cos(math.radians(20)), 0.6 * math.sin(math.radians(20)))
    grid = rasterize_obstacles(WorkspaceBounds((-1.2, -1.2), (1.2, 1.2), 0.01), [CircleObstacle(center, 0.05)])
    ctx = context(chain, model, grid, m_prim=M4, snap_radius=math.inf)
    assert goal_snap((0.0,), (math.radians(40),), ctx) is None
    assert goal_snap((0.0,), (math.radians(-40),), ctx) is not None


def test_lattice_coordinates_round_trip():
    lattice = Lattice((0.1, -0.2), M4)
    assert lattice.coord_of(lattice.config((3, -7))) == (3, -7)
    assert lattice.coord_of((0.1 + 0.5 * M4, -0.2)) is None
    assert joint_directions(2) == [(0, 1), (0, -1), (1, 1), (1, -1)]


def test_generators_by_mode(two_link_chain, tip_sphere_model, empty_grid):
    fixed = make_generator(context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4, mode=PrimitiveMode.FIXED))
    bur = make_generator(context(two_link_chain, tip_sphere_model, empty_grid, m_prim=M4))
    assert isinstance(fixed, FixedPrimitiveGenerator)
    assert isinstance(bur, BurPrimitiveGenerator)
    assert fixed.expand((0.0, 0.0), (0, 0)).d_c is None
    expansion = bur.expand((0.0, 0.0), (0, 0))
    assert expansion.d_c == 1.0
    assert all(e.provenance == Provenance.BUR for e in expansion.successors)


def test_primitive_params_validation():
    with pytest.raises(ValueError):
        PrimitiveParams(m_prim=0.0)
    with pytest.raises(ValueError):
        PrimitiveParams(m_prim=M4, d_crit=0.0)
    assert PrimitiveParams(m_prim=M4).effective_snap_radius == pytest.approx(2 * M4)
