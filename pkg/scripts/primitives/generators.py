"""
Successor generation for one lattice expansion.

Two generators share one interface: fixed primitives (one m_prim step per
signed joint direction, each edge collision-checked) and burs (single-joint
spines whose length adapts to the clearance d_c and needs no edge check).
Both add the optional direct connection to the goal.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Type

import numpy as np

from robot.chain import KinematicChain, SphereChainModel
from robot.collision import (
    DEFAULT_CLEARANCE_CAP,
    clearance,
    default_interpolation_step,
    moment_arms,
    motion_collision_check,
)
from workspace.grid import OccupancyGrid
from .lattice import (
    GOAL_KEY,
    Lattice,
    LatticeCoord,
    NodeKey,
    PrimitiveMode,
    PrimitiveParams,
    Provenance,
    SuccessorEntry,
    SuccessorSet,
    config_distance,
    joint_directions,
    step_coord,
)

logger = logging.getLogger(__name__)


def spine_length(d_c: float, r_i: float) -> float:
    """
    Longest provably safe rotation of one joint.

    Rotating joint i by d_c / r_i moves no point of the distal chain by more
    than d_c along its arc.
    """
    if not r_i > 0:
        raise ValueError(f"moment arm must be positive, got {r_i}")
    return max(0.0, d_c) / r_i


def spine_steps(raw: float, m_prim: float) -> int:
    """Number of whole primitive lengths contained in a raw spine."""
    return int(math.floor(raw / m_prim)) if raw > 0 else 0


def discretize_spine(raw: float, m_prim: float) -> float:
    """Round a raw spine down to an integer multiple of m_prim (possibly 0)."""
    return spine_steps(raw, m_prim) * m_prim


@dataclass(frozen=True)
class ExpansionContext:
    """Everything a generator needs besides the expanded state itself."""
    chain: KinematicChain
    model: SphereChainModel
    grid: OccupancyGrid
    lattice: Lattice
    params: PrimitiveParams
    step: float
    clearance_cap: float = DEFAULT_CLEARANCE_CAP

    @classmethod
    def create(cls, chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid,
               q_start, params: PrimitiveParams, clearance_cap: float = DEFAULT_CLEARANCE_CAP,
               step: Optional[float] = None) -> "ExpansionContext":
        return cls(
            chain=chain,
            model=model,
            grid=grid,
            lattice=Lattice(tuple(q_start), params.m_prim),
            params=params,
            step=default_interpolation_step(chain, model, grid) if step is None else step,
            clearance_cap=clearance_cap,
        )


def _fixed_entry(q: np.ndarray, coord: LatticeCoord, joint: int, sign: int,
                 ctx: ExpansionContext) -> Optional[SuccessorEntry]:
    target = step_coord(coord, joint, sign)
    q_succ = ctx.lattice.config(target)
    if not ctx.chain.within_limits(q_succ):
        return None
    if not motion_collision_check(ctx.chain, ctx.model, ctx.grid, q, q_succ, ctx.step):
        return None
    return SuccessorEntry(target, tuple(q_succ), ctx.params.m_prim, Provenance.FIXED)


def _clip_to_limits(q: np.ndarray, coord: LatticeCoord, joint: int, sign: int,
                    steps: int, ctx: ExpansionContext) -> int:
    """Largest k <= steps whose lattice configuration is within joint limits."""
    m_prim = ctx.params.m_prim
    if sign > 0:
        room = ctx.chain.upper[joint] - q[joint]
    else:
        room = q[joint] - ctx.chain.lower[joint]
    k = min(steps, max(0, int(math.floor(room / m_prim)) + 1))
    while k > 0 and not ctx.chain.within_limits(ctx.lattice.config(step_coord(coord, joint, sign * k))):
        k -= 1
    return k


def fixed_successors(q, coord: LatticeCoord, ctx: ExpansionContext) -> SuccessorSet:
    """Up to 2n successors one m_prim step away, each within limits and collision-free."""
    q = ctx.chain.check_dimension(q)
    successors = SuccessorSet()
    for joint, sign in joint_directions(ctx.chain.dof):
        entry = _fixed_entry(q, coord, joint, sign, ctx)
        if entry is not None:
            successors.add(entry)
    return successors


def _spine_multiples(steps: int, params: PrimitiveParams) -> List[int]:
    if steps < 1:
        return []
    if params.intermediate_nodes:
        return list(range(1, steps + 1))
    if params.first_step and steps > 1:
        return [1, steps]
    return [steps]


def bur_successors(q, coord: LatticeCoord, d_c: float, ctx: ExpansionContext) -> SuccessorSet:
    """
    Bur successors of one collision-free, on-lattice configuration.

    Below d_crit the whole expansion falls back to fixed primitives. Above it,
    each signed joint direction gets a spine of floor(d_c / r_i / m_prim)
    steps, clipped at the joint limit; a direction with no whole step falls
    back to a collision-checked fixed primitive. Which nodes along a spine
    are emitted follows ``first_step`` and ``intermediate_nodes``.

    Returns:
        SuccessorSet, possibly empty
    """
    q = ctx.chain.check_dimension(q)
    params = ctx.params
    if d_c < params.d_crit:
        logger.debug("d_c %.4f below d_crit %.4f at %s, using fixed primitives", d_c, params.d_crit, coord)
        return fixed_successors(q, coord, ctx)

    arms = moment_arms(ctx.chain, ctx.model, q)
    successors = SuccessorSet()
    for joint, sign in joint_directions(ctx.chain.dof):
        steps = spine_steps(spine_length(d_c, arms[joint]), params.m_prim)
        if steps < 1:
            logger.debug("spine on joint %d (%+d) shorter than m_prim at %s", joint + 1, sign, coord)
            entry = _fixed_entry(q, coord, joint, sign, ctx)
            if entry is not None:
                successors.add(entry)
            continue

        clipped = _clip_to_limits(q, coord, joint, sign, steps, ctx)
        if clipped < steps:
            logger.debug("spine on joint %d (%+d) clipped from %d to %d steps", joint + 1, sign, steps, clipped)
        for k in _spine_multiples(clipped, params):
            target = step_coord(coord, joint, sign * k)
            successors.add(SuccessorEntry(
                target, tuple(ctx.lattice.config(target)), k * params.m_prim, Provenance.BUR,
            ))
    return successors


def goal_snap(q, q_goal, ctx: ExpansionContext, goal_key: NodeKey = GOAL_KEY) -> Optional[SuccessorEntry]:
    """Direct edge to the exact goal configuration when it is inside the snap gate and collision-free."""
    q = ctx.chain.check_dimension(q)
    q_goal = ctx.chain.check_dimension(q_goal)
    if float(np.max(np.abs(q_goal - q))) > ctx.params.effective_snap_radius:
        return None
    if not motion_collision_check(ctx.chain, ctx.model, ctx.grid, q, q_goal, ctx.step):
        return None
    return SuccessorEntry(goal_key, tuple(q_goal), config_distance(q, q_goal), Provenance.GOAL_SNAP)


@dataclass
class Expansion:
    """Successors of one expanded state, with the clearance used to build them."""
    successors: SuccessorSet
    d_c: Optional[float] = None


class SuccessorGenerator(ABC):
    """Abstract base class for successor generators."""

    mode: PrimitiveMode

    def __init__(self, ctx: ExpansionContext):
        self.ctx = ctx

    @abstractmethod
    def expand(self, q, coord: LatticeCoord) -> Expansion:
        """
        Generate lattice successors of one state.

        Args:
            q: configuration of the expanded state
            coord: its lattice coordinate

        Returns:
            Expansion holding the successor set
        """
        pass

    def snap(self, q, q_goal, goal_key: NodeKey = GOAL_KEY) -> Optional[SuccessorEntry]:
        return goal_snap(q, q_goal, self.ctx, goal_key)


class FixedPrimitiveGenerator(SuccessorGenerator):
    """2n constant-length primitives; d_c is never computed."""

    mode = PrimitiveMode.FIXED

    def expand(self, q, coord: LatticeCoord) -> Expansion:
        return Expansion(fixed_successors(q, coord, self.ctx))


class BurPrimitiveGenerator(SuccessorGenerator):
    """Clearance-adaptive single-joint spines."""

    mode = PrimitiveMode.BUR

    def expand(self, q, coord: LatticeCoord) -> Expansion:
        ctx = self.ctx
        d_c = clearance(ctx.chain, ctx.model, ctx.grid, q, ctx.clearance_cap).d_c
        return Expansion(bur_successors(q, coord, d_c, ctx), d_c)


_GENERATORS: Dict[PrimitiveMode, Type[SuccessorGenerator]] = {
    PrimitiveMode.FIXED: FixedPrimitiveGenerator,
    PrimitiveMode.BUR: BurPrimitiveGenerator,
}


def make_generator(ctx: ExpansionContext) -> SuccessorGenerator:
    """Generator matching ctx.params.mode."""
    return _GENERATORS[ctx.params.mode](ctx)
