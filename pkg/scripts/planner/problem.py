"""
A planning query bound to its rasterized workspace and robot model.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from robot.chain import KinematicChain, SphereChainModel
from robot.collision import DEFAULT_CLEARANCE_CAP, in_collision
from workspace.grid import OccupancyGrid, rasterize
from workspace.scenario import Scenario

logger = logging.getLogger(__name__)


class InvalidQueryError(ValueError):
    """Start or goal is out of joint limits or in collision."""


@dataclass(frozen=True)
class PlanningProblem:
    """Immutable, shareable setup for one or many planner runs."""
    scenario: Scenario
    grid: OccupancyGrid
    chain: KinematicChain
    model: SphereChainModel
    clearance_cap: float = DEFAULT_CLEARANCE_CAP

    @classmethod
    def from_scenario(cls, scenario: Scenario, grid: Optional[OccupancyGrid] = None,
                      cell_size: Optional[float] = None,
                      clearance_cap: float = DEFAULT_CLEARANCE_CAP) -> "PlanningProblem":
        chain = KinematicChain.from_spec(scenario.robot)
        return cls(
            scenario=scenario,
            grid=rasterize(scenario, cell_size) if grid is None else grid,
            chain=chain,
            model=SphereChainModel.from_spec(scenario.robot, chain),
            clearance_cap=clearance_cap,
        )

    @property
    def dof(self) -> int:
        return self.chain.dof

    @property
    def q_start(self) -> np.ndarray:
        return np.asarray(self.scenario.q_start, dtype=float)

    @property
    def q_goal(self) -> np.ndarray:
        return np.asarray(self.scenario.q_goal, dtype=float)

    def validate(self) -> None:
        """
        Raises:
            InvalidQueryError: start or goal out of limits or in collision
            DimensionMismatchError: start or goal has the wrong length
        """
        for label, q in (("start", self.q_start), ("goal", self.q_goal)):
            if not self.chain.within_limits(q):
                raise InvalidQueryError(f"{self.scenario.name}: {label} outside joint limits")
            if in_collision(self.chain, self.model, self.grid, q):
                raise InvalidQueryError(f"{self.scenario.name}: {label} in collision")
