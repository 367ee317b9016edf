"""
Anytime repairing A* over the primitive lattice.

The first search runs with the initial inflation factor under the planning
budget. Every later iteration lowers the inflation, moves the inconsistent
states back into OPEN and repairs the previous search under the repair
budget, until the solution is proven optimal or time runs out.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

from primitives.generators import ExpansionContext, SuccessorGenerator, make_generator
from primitives.lattice import GOAL_KEY, NodeKey, PrimitiveMode, SuccessorEntry, config_distance
from robot.chain import DimensionMismatchError
from workspace.scenario import Scenario
from .frontier import INFINITY, FrontierState, SearchNode
from .params import InconsPolicy, PlannerParams
from .problem import InvalidQueryError, PlanningProblem

logger = logging.getLogger(__name__)

Configuration = Tuple[float, ...]

__all__ = [
    "BrokenParentChainError",
    "ExpansionRecord",
    "InvalidQueryError",
    "IterationRecord",
    "PlanResult",
    "PlanStatus",
    "ara_star",
    "compute_eps_prime",
    "edge_cost",
    "heuristic",
    "improve_path",
    "reconstruct_path",
]


class BrokenParentChainError(RuntimeError):
    """Following parents from the goal does not reach the start."""


class PlanStatus(str, Enum):
    SOLVED_OPTIMAL = "SOLVED_OPTIMAL"
    SOLVED_SUBOPTIMAL = "SOLVED_SUBOPTIMAL"
    TIMEOUT_NO_SOLUTION = "TIMEOUT_NO_SOLUTION"


@dataclass(frozen=True)
class IterationRecord:
    """One published solution. ``expansions`` is cumulative, ``elapsed`` in seconds from the start."""
    epsilon: float
    eps_prime: float
    cost: float
    expansions: int
    elapsed: float


@dataclass(frozen=True)
class ExpansionRecord:
    key: NodeKey
    q: Configuration
    d_c: Optional[float]
    successors: Tuple[SuccessorEntry, ...]


@dataclass
class PlanResult:
    status: PlanStatus
    mode: PrimitiveMode
    path: List[Configuration] = field(default_factory=list)
    cost: Optional[float] = None
    eps_prime_final: Optional[float] = None
    iterations: List[IterationRecord] = field(default_factory=list)
    n_init: Optional[int] = None
    t_init: Optional[float] = None
    n_final: Optional[int] = None
    t_final: Optional[float] = None
    expansions: int = 0
    exhausted: bool = False
    expansion_log: List[ExpansionRecord] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status != PlanStatus.TIMEOUT_NO_SOLUTION


def _check_pair(q_a, q_b) -> None:
    if len(q_a) != len(q_b):
        raise DimensionMismatchError(f"configurations have {len(q_a)} and {len(q_b)} angles")


def heuristic(q, q_goal) -> float:
    """Euclidean C-space distance to the goal."""
    _check_pair(q, q_goal)
    return config_distance(q, q_goal)


def edge_cost(q_a, q_b) -> float:
    _check_pair(q_a, q_b)
    return config_distance(q_a, q_b)


def compute_eps_prime(epsilon: float, g_goal: float, frontier: FrontierState) -> float:
    """
    Suboptimality bound of the current solution:
    min(epsilon, g_goal / min over OPEN and INCONS of g + h), never below 1.

    An infinite goal cost gives epsilon back; an empty OPEN and INCONS with a
    finite goal cost means the search is exhausted and the solution optimal.
    """
    if math.isinf(g_goal):
        return epsilon
    denominator = frontier.bound_denominator()
    if math.isinf(denominator):
        return 1.0
    if denominator <= 0.0:
        return 1.0 if g_goal <= 0.0 else epsilon
    return max(1.0, min(epsilon, g_goal / denominator))


@dataclass
class SearchOutcome:
    expansions: int
    interrupted: bool


class _Budget:
    """Wall-clock deadline plus the optional global expansion cap."""

    def __init__(self, clock: Callable[[], float], max_expansions: Optional[int]):
        self.clock = clock
        self.max_expansions = max_expansions
        self.used = 0
        self.deadline = INFINITY

    def exceeded(self) -> bool:
        if self.max_expansions is not None and self.used >= self.max_expansions:
            return True
        return self.clock() >= self.deadline


def improve_path(frontier: FrontierState, goal: SearchNode, generator: SuccessorGenerator,
                 q_goal: Sequence[float], budget: _Budget,
                 policy: InconsPolicy = InconsPolicy.STANDARD,
                 log: Optional[List[ExpansionRecord]] = None) -> SearchOutcome:
    """
    Expand minimum-key states until the goal key is no larger than every key in OPEN.

    Returns:
        SearchOutcome with the number of expansions in this call and whether
        the budget interrupted it
    """
    expansions = 0
    while frontier.open_size and goal.g > frontier.min_f():
        if budget.exceeded():
            return SearchOutcome(expansions, interrupted=True)
        state = frontier.pop()
        frontier.close(state)
        expansions += 1
        budget.used += 1
        if state.key == GOAL_KEY:
            continue

        expansion = generator.expand(state.q, state.key)
        entries = list(expansion.successors)
        snap = generator.snap(state.q, q_goal, goal.key)
        if snap is not None:
            entries.append(snap)
        if log is not None:
            log.append(ExpansionRecord(state.key, state.q, expansion.d_c, tuple(entries)))

        for entry in entries:
            succ = frontier.register(entry.coord, entry.q, heuristic(entry.q, q_goal))
            candidate = state.g + entry.cost
            if candidate < succ.g:
                succ.g = candidate
                succ.parent = state.key
                succ.provenance = entry.provenance
                succ.edge_cost = entry.cost
                if succ.key not in frontier.closed:
                    frontier.push(succ)
                elif policy == InconsPolicy.STANDARD:
                    frontier.defer(succ)
            elif policy == InconsPolicy.LITERAL:
                frontier.defer(succ)
    return SearchOutcome(expansions, interrupted=False)


def reconstruct_path(goal: SearchNode, nodes, start_key: NodeKey) -> List[Configuration]:
    """
    Configurations from the start to the goal along parent links.

    Raises:
        BrokenParentChainError: a missing parent or a cycle
    """
    path = [goal.q]
    seen = {goal.key}
    node = goal
    while node.key != start_key:
        if node.parent is None or node.parent not in nodes:
            raise BrokenParentChainError(f"node {node.key!r} has no parent on the way to the start")
        node = nodes[node.parent]
        if node.key in seen:
            raise BrokenParentChainError(f"parent cycle through {node.key!r}")
        seen.add(node.key)
        path.append(node.q)
    path.reverse()
    return path


def ara_star(query: Union[Scenario, PlanningProblem], params: PlannerParams,
             mode: Optional[PrimitiveMode] = None,
             clock: Callable[[], float] = time.perf_counter) -> PlanResult:
    """
    Plan from the query's start to its goal.

    Args:
        query: a Scenario (rasterized here) or a prepared PlanningProblem
        params: planner parameters
        mode: overrides params.primitives.mode when given

    Returns:
        PlanResult

    Raises:
        InvalidQueryError: start or goal out of limits or in collision
    """
    problem = query if isinstance(query, PlanningProblem) else PlanningProblem.from_scenario(query)
    if mode is not None:
        params = params.with_mode(mode)
    problem.validate()

    ctx = ExpansionContext.create(problem.chain, problem.model, problem.grid, problem.q_start,
                                  params.primitives, problem.clearance_cap)
    generator = make_generator(ctx)
    q_goal = tuple(problem.scenario.q_goal)
    result = PlanResult(status=PlanStatus.TIMEOUT_NO_SOLUTION, mode=params.mode)
    log = result.expansion_log if params.record_expansions else None

    t0 = clock()
    budget = _Budget(clock, params.max_expansions)
    budget.deadline = t0 + params.t_plan

    epsilon = params.epsilon_init
    frontier = FrontierState(epsilon)
    start_key = tuple(0 for _ in range(problem.dof))
    start = frontier.register(start_key, problem.q_start, heuristic(problem.q_start, q_goal))
    start.g = 0.0
    goal_key = ctx.lattice.coord_of(q_goal)
    goal = frontier.register(GOAL_KEY if goal_key is None else goal_key, q_goal, 0.0)
    frontier.push(start)

    outcome = improve_path(frontier, goal, generator, q_goal, budget, params.incons_policy, log)
    result.expansions = budget.used
    if math.isinf(goal.g):
        result.exhausted = not outcome.interrupted
        logger.info(
            "%s %s: no solution after %d expansions (%s)",
            problem.scenario.name, params.mode.value, budget.used,
            "lattice exhausted" if result.exhausted else "budget expired",
        )
        return result

    eps_prime = compute_eps_prime(epsilon, goal.g, frontier)
    _publish(result, frontier, goal, start_key, epsilon, eps_prime, budget.used, clock() - t0)
    result.n_init, result.t_init = result.expansions, result.iterations[0].elapsed
    logger.info("%s %s: first solution cost %.4f, eps %.2f, eps' %.3f, %d expansions, %.3f s",
                problem.scenario.name, params.mode.value, goal.g, epsilon, eps_prime,
                result.expansions, result.t_init)

    budget.deadline = clock() + params.t_repair
    while eps_prime > 1.0 and not budget.exceeded():
        epsilon = max(1.0, epsilon - params.delta_epsilon)
        frontier.rekey(epsilon)
        outcome = improve_path(frontier, goal, generator, q_goal, budget, params.incons_policy, log)
        if outcome.interrupted:
            logger.debug("repair iteration at eps %.2f interrupted after %d expansions",
                         epsilon, outcome.expansions)
            break
        eps_prime = min(eps_prime, compute_eps_prime(epsilon, goal.g, frontier))
        _publish(result, frontier, goal, start_key, epsilon, eps_prime, budget.used, clock() - t0)
        logger.info("%s %s: eps %.2f, eps' %.3f, cost %.4f, %d expansions",
                    problem.scenario.name, params.mode.value, epsilon, eps_prime, goal.g, budget.used)

    if eps_prime <= 1.0:
        result.status = PlanStatus.SOLVED_OPTIMAL
        result.n_final = result.iterations[-1].expansions
        result.t_final = result.iterations[-1].elapsed
    else:
        result.status = PlanStatus.SOLVED_SUBOPTIMAL
    result.expansions = budget.used
    return result


def _publish(result: PlanResult, frontier: FrontierState, goal: SearchNode, start_key: NodeKey,
             epsilon: float, eps_prime: float, expansions: int, elapsed: float) -> None:
    result.path = reconstruct_path(goal, frontier.nodes, start_key)
    result.cost = goal.g
    result.eps_prime_final = eps_prime
    result.expansions = expansions
    result.iterations.append(IterationRecord(epsilon, eps_prime, goal.g, expansions, elapsed))
