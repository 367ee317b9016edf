"""
End-to-end runs over the shipped suite and generated small scenarios. Slow; run with ``pytest -m slow``.
"""
import csv
import math
from functools import lru_cache

import numpy as np
import pytest

from conftest import SCENARIOS_DIR, lattice_dijkstra, make_scenario
from bench.runner import SweepSpec, run_single, run_sweep
from bench.tables import CSV_HEADER, resolution_sensitivity, write_csv
from planner.ara_star import PlanStatus, ara_star, edge_cost
from planner.params import PlannerParams
from planner.problem import InvalidQueryError, PlanningProblem
from primitives.lattice import PrimitiveMode, Provenance
from robot.collision import motion_collision_check
from workspace.scenario import load_scenario

pytestmark = pytest.mark.slow

TWO_DOF = sorted(SCENARIOS_DIR.glob("2dof_*.yaml"))
ALL_SCENARIOS = sorted(SCENARIOS_DIR.glob("*.yaml"))
M_PRIM_DEG = tuple(float(m) for m in range(4, 13))
M4 = math.radians(4.0)
TIMING_COLUMNS = {"t_init_ms", "t_final_ms"}
SMALL_COUNT = 20


@lru_cache(maxsize=None)
def small_problems(count=SMALL_COUNT, seed=41):
    """Valid 2-DoF problems on a coarse grid; some goals sit off the 4 deg lattice."""
    rng = np.random.default_rng(seed)
    problems = []
    while len(problems) < count:
        obstacles = []
        for _ in range(int(rng.integers(1, 4))):
            rho = float(rng.uniform(0.35, 0.95))
            phi = float(rng.uniform(-math.pi, math.pi))
            obstacles.append({
                "type": "circle",
                "center": [rho * math.cos(phi), rho * math.sin(phi)],
                "radius": float(rng.uniform(0.06, 0.15)),
            })
        start = [4.0 * int(v) for v in rng.integers(-40, 41, size=2)]
        goal = [4.0 * int(v) for v in rng.integers(-40, 41, size=2)]
        if len(problems) % 2:
            goal[0] += 1.5
        scenario = make_scenario(name=f"small_{len(problems):02d}", obstacles=obstacles,
                                 start_deg=start, goal_deg=goal, cell_size=0.02)
        problem = PlanningProblem.from_scenario(scenario)
        try:
            problem.validate()
        except InvalidQueryError:
            continue
        problems.append(problem)
    return tuple(problems)


def long_budget(mode, epsilon):
    return PlannerParams.for_dof(2, M4, mode, epsilon_init=epsilon, t_plan=300.0, t_repair=300.0)


@pytest.mark.parametrize("path", TWO_DOF, ids=lambda p: p.stem)
@pytest.mark.parametrize("mode", [PrimitiveMode.FIXED, PrimitiveMode.BUR])
def test_shipped_two_dof_scenarios_are_solved(path, mode):
    problem = PlanningProblem.from_scenario(load_scenario(path))
    params = PlannerParams.for_dof(2, M4, mode)
    result = ara_star(problem, params)
    assert result.solved
    assert sum(edge_cost(a, b) for a, b in zip(result.path, result.path[1:])) == pytest.approx(result.cost, abs=1e-9)
    for a, b in zip(result.path, result.path[1:]):
        assert motion_collision_check(problem.chain, problem.model, problem.grid, a, b)


def test_bur_edges_pass_dense_recheck_across_the_suite():
    checked = 0
    for path in ALL_SCENARIOS:
        problem = PlanningProblem.from_scenario(load_scenario(path))
        dense = problem.grid.cell_size / (problem.chain.reach + problem.model.radius) / 4.0
        budget = 600 if problem.dof <= 3 else 150
        for m_prim_deg in (4.0, 8.0, 12.0):
            params = PlannerParams.for_dof(problem.dof, math.radians(m_prim_deg), PrimitiveMode.BUR,
                                           record_expansions=True, max_expansions=budget)
            result = ara_star(problem, params)
            for record in result.expansion_log:
                for entry in record.successors:
                    if entry.provenance != Provenance.BUR:
                        continue
                    assert motion_collision_check(problem.chain, problem.model, problem.grid,
                                                  record.q, entry.q, dense), (path.stem, record.key, entry.coord)
                    checked += 1
    assert checked >= 10_000


@pytest.mark.parametrize("index", range(SMALL_COUNT))
def test_unit_inflation_first_solution_is_lattice_optimal(index):
    problem = small_problems()[index]
    optimum = lattice_dijkstra(problem, M4, PrimitiveMode.FIXED)
    result = ara_star(problem, long_budget(PrimitiveMode.FIXED, 1.0))
    if math.isinf(optimum):
        assert not result.solved and result.exhausted
        return
    assert result.iterations[0].cost == pytest.approx(optimum, abs=1e-9)


@pytest.mark.parametrize("epsilon", [1.5, 3.0, 10.0])
@pytest.mark.parametrize("mode", [PrimitiveMode.FIXED, PrimitiveMode.BUR])
def test_reported_solutions_stay_within_their_bound(mode, epsilon):
    for problem in small_problems():
        optimum = lattice_dijkstra(problem, M4, mode)
        result = ara_star(problem, long_budget(mode, epsilon))
        if math.isinf(optimum):
            assert not result.solved
            continue
        assert result.iterations
        for iteration in result.iterations:
            assert iteration.cost <= iteration.eps_prime * optimum + 1e-9
        eps_primes = [it.eps_prime for it in result.iterations]
        costs = [it.cost for it in result.iterations]
        assert all(a >= b for a, b in zip(eps_primes, eps_primes[1:]))
        assert all(a >= b - 1e-12 for a, b in zip(costs, costs[1:]))
        assert eps_primes[-1] >= 1.0


@pytest.mark.parametrize("path", TWO_DOF, ids=lambda p: p.stem)
@pytest.mark.parametrize("m_prim_deg", M_PRIM_DEG)
def test_modes_converge_to_the_same_cost(path, m_prim_deg):
    problem = PlanningProblem.from_scenario(load_scenario(path))
    costs = {}
    for mode in (PrimitiveMode.FIXED, PrimitiveMode.BUR):
        params = PlannerParams.for_dof(2, math.radians(m_prim_deg), mode,
                                       epsilon_init=1.0, t_plan=300.0, t_repair=300.0)
        result = ara_star(problem, params)
        assert result.status == PlanStatus.SOLVED_OPTIMAL
        costs[mode] = result.cost
    assert costs[PrimitiveMode.BUR] == pytest.approx(costs[PrimitiveMode.FIXED], abs=1e-9)


def test_degradation_in_the_corridor():
    problem = PlanningProblem.from_scenario(load_scenario(SCENARIOS_DIR / "2dof_corridor.yaml"))
    params = PlannerParams.for_dof(2, M4, PrimitiveMode.BUR, d_crit=10.0,
                                   record_expansions=True, max_expansions=500)
    bur = ara_star(problem, params)
    fixed = ara_star(problem, params.with_mode(PrimitiveMode.FIXED))
    assert len(bur.expansion_log) == len(fixed.expansion_log) > 0
    for b, f in zip(bur.expansion_log, fixed.expansion_log):
        assert b.key == f.key
        assert [(e.coord, e.cost, e.provenance) for e in b.successors] == \
            [(e.coord, e.cost, e.provenance) for e in f.successors]


def test_easy_sweep_burs_need_fewer_initial_expansions():
    spec = SweepSpec(
        scenarios=(load_scenario(SCENARIOS_DIR / "2dof_easy.yaml"),),
        m_prim_deg=M_PRIM_DEG,
        serial=True,
    )
    records = run_sweep(spec)
    fixed = [r for r in records if r.mode == PrimitiveMode.FIXED]
    bur = [r for r in records if r.mode == PrimitiveMode.BUR]
    assert len(fixed) == len(bur) == 9
    assert all(r.solved for r in records)
    assert sum(r.n_init for r in bur) < sum(r.n_init for r in fixed)


def test_seven_dof_easy_burs_cut_initial_expansions():
    problem = PlanningProblem.from_scenario(load_scenario(SCENARIOS_DIR / "7dof_easy.yaml"))
    fixed = run_single(problem, PlannerParams.for_dof(7, M4, PrimitiveMode.FIXED))
    bur = run_single(problem, PlannerParams.for_dof(7, M4, PrimitiveMode.BUR))
    assert fixed.solved and bur.solved
    assert bur.n_init <= 0.8 * fixed.n_init


def test_burs_are_less_sensitive_to_resolution():
    spec = SweepSpec(
        scenarios=(load_scenario(SCENARIOS_DIR / "2dof_easy.yaml"),),
        m_prim_deg=(4.0, 12.0),
        overrides={"t_repair": 120.0},
        serial=True,
    )
    records = run_sweep(spec)
    assert all(r.converged for r in records)
    ratios = {s.mode: s.n_final_ratio for s in resolution_sensitivity(records)}
    assert ratios[PrimitiveMode.BUR] < ratios[PrimitiveMode.FIXED]


def _non_timing_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    kept = [c for c in CSV_HEADER if c not in TIMING_COLUMNS]
    return [[row[c] for c in kept] for row in rows]


def test_repeated_sweeps_agree_outside_timing_columns(tmp_path):
    spec = SweepSpec(
        scenarios=tuple(load_scenario(p) for p in TWO_DOF),
        m_prim_deg=M_PRIM_DEG,
        overrides={"t_plan": 600.0, "t_repair": 600.0, "max_expansions": 1500},
        serial=True,
    )
    first = write_csv(run_sweep(spec), tmp_path / "first.csv")
    second = write_csv(run_sweep(spec), tmp_path / "second.csv")
    rows = _non_timing_rows(first)
    assert len(rows) == len(TWO_DOF) * len(M_PRIM_DEG) * 2
    assert rows == _non_timing_rows(second)
