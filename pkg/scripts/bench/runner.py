"""
Benchmark runs: one planner query per record, sweeps over primitive lengths.

A sweep cell is one (scenario, m_prim, mode) triple. Cells may run in a
process pool; the repetitions of one cell always run back to back in the
same process.
"""
import logging
import math
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from planner.ara_star import IterationRecord, PlanResult, PlanStatus, ara_star
from planner.params import PlannerParams
from planner.problem import InvalidQueryError, PlanningProblem
from primitives.lattice import PrimitiveMode
from robot.chain import RobotModelError
from robot.collision import DEFAULT_CLEARANCE_CAP
from workspace.scenario import Scenario, ScenarioError

logger = logging.getLogger(__name__)

INVALID = "INVALID"
MODES = (PrimitiveMode.FIXED, PrimitiveMode.BUR)


@dataclass
class BenchmarkRecord:
    """
    Metrics of one sweep cell. Times in milliseconds, m_prim in degrees.

    t_final, n_final and c are present only when the bound reached 1.
    """
    scenario: str
    mode: PrimitiveMode
    m_prim_deg: float
    status: str
    t_init_ms: Optional[float] = None
    n_init: Optional[float] = None
    t_final_ms: Optional[float] = None
    n_final: Optional[float] = None
    c_rad: Optional[float] = None
    repetitions: int = 1
    iterations: List[IterationRecord] = field(default_factory=list, compare=False)
    path: List[Tuple[float, ...]] = field(default_factory=list, compare=False)

    @property
    def converged(self) -> bool:
        return self.t_final_ms is not None

    @property
    def solved(self) -> bool:
        return self.n_init is not None


@dataclass(frozen=True)
class SweepSpec:
    """
    Scenario suite, primitive lengths (degrees) and repetitions.

    ``overrides`` are PlannerParams.for_dof keyword overrides applied to
    every cell on top of the per-DoF defaults.
    """
    scenarios: Tuple[Scenario, ...]
    m_prim_deg: Tuple[float, ...]
    repetitions: int = 1
    modes: Tuple[PrimitiveMode, ...] = MODES
    overrides: Dict[str, Any] = field(default_factory=dict)
    serial: bool = False
    workers: int = 1
    cell_size: Optional[float] = None
    clearance_cap: float = DEFAULT_CLEARANCE_CAP

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be at least 1, got {self.repetitions}")
        if not self.m_prim_deg or any(not m > 0 for m in self.m_prim_deg):
            raise ValueError(f"m_prim values must be positive, got {self.m_prim_deg}")
        if not self.scenarios:
            raise ValueError("a sweep needs at least one scenario")
        object.__setattr__(self, "modes", tuple(PrimitiveMode(m) for m in self.modes))

    def params_for(self, scenario: Scenario, m_prim_deg: float, mode: PrimitiveMode) -> PlannerParams:
        return PlannerParams.for_dof(scenario.dof, math.radians(m_prim_deg), mode, **dict(self.overrides))


def record_from_result(scenario_name: str, m_prim_deg: float, result: PlanResult) -> BenchmarkRecord:
    record = BenchmarkRecord(
        scenario=scenario_name,
        mode=result.mode,
        m_prim_deg=m_prim_deg,
        status=result.status.value,
        iterations=list(result.iterations),
        path=list(result.path),
    )
    if result.solved:
        record.t_init_ms = result.t_init * 1000.0
        record.n_init = result.n_init
    if result.status == PlanStatus.SOLVED_OPTIMAL:
        record.t_final_ms = result.t_final * 1000.0
        record.n_final = result.n_final
        record.c_rad = result.cost
    return record


def run_single(query, params: PlannerParams, mode: Optional[PrimitiveMode] = None,
               m_prim_deg: Optional[float] = None) -> BenchmarkRecord:
    """
    Run the planner once and turn the outcome into a record.

    Invalid queries become INVALID records instead of raising. ``m_prim_deg``
    labels the record; it defaults to the parameter value converted to degrees.
    """
    mode = PrimitiveMode(mode) if mode is not None else params.mode
    name = query.scenario.name if isinstance(query, PlanningProblem) else query.name
    if m_prim_deg is None:
        m_prim_deg = math.degrees(params.primitives.m_prim)
    try:
        result = ara_star(query, params, mode)
    except (InvalidQueryError, ScenarioError, RobotModelError) as e:
        logger.warning("%s %s at %.2f deg: %s", name, mode.value, m_prim_deg, e)
        return BenchmarkRecord(scenario=name, mode=mode, m_prim_deg=m_prim_deg, status=INVALID)
    return record_from_result(name, m_prim_deg, result)


def _mean(values: Sequence[float]) -> Optional[float]:
    return statistics.fmean(values) if values else None


def aggregate(records: Sequence[BenchmarkRecord]) -> BenchmarkRecord:
    """
    Average the repetitions of one cell.

    Times and expansion counts are averaged over the repetitions that
    produced them; c comes from the first converged repetition.
    """
    first = records[0]
    counts = Counter(r.status for r in records)
    status = max(counts, key=lambda s: (counts[s], s == INVALID, s == PlanStatus.TIMEOUT_NO_SOLUTION.value))
    converged = [r for r in records if r.converged]
    solved = [r for r in records if r.solved]
    return BenchmarkRecord(
        scenario=first.scenario,
        mode=first.mode,
        m_prim_deg=first.m_prim_deg,
        status=status,
        t_init_ms=_mean([r.t_init_ms for r in solved]),
        n_init=_mean([r.n_init for r in solved]),
        t_final_ms=_mean([r.t_final_ms for r in converged]),
        n_final=_mean([r.n_final for r in converged]),
        c_rad=converged[0].c_rad if converged else None,
        repetitions=len(records),
        iterations=first.iterations,
        path=converged[0].path if converged else first.path,
    )


def _run_cell(problem: PlanningProblem, params: PlannerParams, repetitions: int,
              m_prim_deg: float) -> BenchmarkRecord:
    return aggregate([run_single(problem, params, m_prim_deg=m_prim_deg) for _ in range(repetitions)])


def _prepare(spec: SweepSpec) -> List[Optional[PlanningProblem]]:
    problems = []
    for scenario in spec.scenarios:
        try:
            problems.append(PlanningProblem.from_scenario(scenario, cell_size=spec.cell_size,
                                                          clearance_cap=spec.clearance_cap))
        except (ScenarioError, RobotModelError) as e:
            logger.warning("Skipping scenario %s: %s", scenario.name, e)
            problems.append(None)
    return problems


def run_sweep(spec: SweepSpec) -> List[BenchmarkRecord]:
    """
    Run every (scenario, m_prim, mode) cell of the sweep.

    Returns:
        One aggregated record per cell, ordered by scenario, m_prim, mode
    """
    problems = _prepare(spec)
    cells = []
    for problem, scenario in zip(problems, spec.scenarios):
        for m_prim_deg in spec.m_prim_deg:
            for mode in spec.modes:
                cells.append((scenario, problem, m_prim_deg, spec.params_for(scenario, m_prim_deg, mode)))

    logger.info("Sweep: %d scenarios x %d m_prim x %d modes, %d repetitions",
                len(spec.scenarios), len(spec.m_prim_deg), len(spec.modes), spec.repetitions)

    records: List[Optional[BenchmarkRecord]] = [None] * len(cells)
    runnable = [(i, cell) for i, cell in enumerate(cells) if cell[1] is not None]
    for i, (scenario, problem, m_prim_deg, params) in enumerate(cells):
        if problem is None:
            records[i] = BenchmarkRecord(scenario.name, params.mode, m_prim_deg, INVALID,
                                         repetitions=spec.repetitions)

    if spec.serial or spec.workers <= 1:
        for i, (_, problem, m_prim_deg, params) in runnable:
            records[i] = _run_cell(problem, params, spec.repetitions, m_prim_deg)
            _log_cell(records[i])
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = {
                i: pool.submit(_run_cell, problem, params, spec.repetitions, m_prim_deg)
                for i, (_, problem, m_prim_deg, params) in runnable
            }
            for i, future in futures.items():
                records[i] = future.result()
                _log_cell(records[i])
    return records


def _log_cell(record: BenchmarkRecord) -> None:
    if record.solved:
        logger.info("%s %s %.1f deg: %s, n_init %.0f, t_init %.1f ms",
                    record.scenario, record.mode.value, record.m_prim_deg, record.status,
                    record.n_init, record.t_init_ms)
    else:
        logger.warning("%s %s %.1f deg: %s", record.scenario, record.mode.value,
                       record.m_prim_deg, record.status)
