"""
Scenario files: declarative workspace, obstacles, robot and query.

Files are YAML documents following docs/scenario-schema.md. Angles are
degrees on disk and radians everywhere else.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import yaml

from .grid import CircleObstacle, Obstacle, Point, RectObstacle, WorkspaceBounds

logger = logging.getLogger(__name__)

SUPPORTED_SCHEMA_VERSIONS = (1,)
DEFAULT_CELL_SIZE = 0.01
DEFAULT_SPHERE_RADIUS = 0.05


class ScenarioError(ValueError):
    """Base class for scenario problems."""


class ScenarioParseError(ScenarioError):
    """The file could not be read or does not have the expected shape."""


class ScenarioValidationError(ScenarioError):
    """The file parsed but violates a scenario invariant."""


class Tier(str, Enum):
    EASY = "EASY"
    MEDIUM = "MEDIUM"
    HARD = "HARD"


@dataclass(frozen=True)
class RobotSpec:
    """Robot geometry as declared in a scenario."""
    link_lengths: Tuple[float, ...]
    sphere_radius: float = DEFAULT_SPHERE_RADIUS
    spheres_per_link: Optional[int] = None
    base: Point = (0.0, 0.0)
    joint_limits: Optional[Tuple[Tuple[float, float], ...]] = None  # radians

    @property
    def dof(self) -> int:
        return len(self.link_lengths)


@dataclass(frozen=True)
class Scenario:
    """A validated planning scenario. Angles in radians, lengths in meters."""
    name: str
    tier: Tier
    workspace: WorkspaceBounds
    obstacles: Tuple[Obstacle, ...]
    robot: RobotSpec
    q_start: Tuple[float, ...]
    q_goal: Tuple[float, ...]
    schema_version: int = 1
    description: str = ""
    source_path: Optional[str] = field(default=None, compare=False)

    @property
    def dof(self) -> int:
        return self.robot.dof


def _obstacle_meets_bounds(obstacle: Obstacle, bounds: WorkspaceBounds) -> bool:
    x0, y0, x1, y1 = obstacle.bbox
    (bx0, by0), (bx1, by1) = bounds.min_corner, bounds.max_corner
    if isinstance(obstacle, CircleObstacle):
        cx = min(max(obstacle.center[0], bx0), bx1)
        cy = min(max(obstacle.center[1], by0), by1)
        return math.hypot(cx - obstacle.center[0], cy - obstacle.center[1]) <= obstacle.radius
    return x0 <= bx1 and x1 >= bx0 and y0 <= by1 and y1 >= by0


def validate_scenario(scenario: Scenario) -> None:
    """
    Check the invariants that do not need a rasterized grid.

    Raises:
        ScenarioValidationError: on the first violated invariant
    """
    dof = scenario.robot.dof
    if dof < 1:
        raise ScenarioValidationError(f"{scenario.name}: robot needs at least one link")
    if len(scenario.q_start) != dof or len(scenario.q_goal) != dof:
        raise ScenarioValidationError(
            f"{scenario.name}: dimension mismatch: start has {len(scenario.q_start)} angles, "
            f"goal has {len(scenario.q_goal)}, robot has {dof} links"
        )
    if any(length <= 0 for length in scenario.robot.link_lengths):
        raise ScenarioValidationError(f"{scenario.name}: link lengths must be positive")
    if scenario.robot.sphere_radius <= 0:
        raise ScenarioValidationError(f"{scenario.name}: sphere_radius must be positive")
    if scenario.robot.spheres_per_link is not None and scenario.robot.spheres_per_link < 1:
        raise ScenarioValidationError(f"{scenario.name}: spheres_per_link must be at least 1")
    limits = scenario.robot.joint_limits
    if limits is not None:
        if len(limits) != dof:
            raise ScenarioValidationError(
                f"{scenario.name}: {len(limits)} joint limits given for {dof} joints"
            )
        for index, (lo, hi) in enumerate(limits):
            if not lo < hi:
                raise ScenarioValidationError(f"{scenario.name}: joint {index + 1} limit lo >= hi")
        for label, q in (("start", scenario.q_start), ("goal", scenario.q_goal)):
            for index, (angle, (lo, hi)) in enumerate(zip(q, limits)):
                if not lo <= angle <= hi:
                    raise ScenarioValidationError(
                        f"{scenario.name}: {label} joint {index + 1} outside joint limits"
                    )
    for index, obstacle in enumerate(scenario.obstacles):
        if not _obstacle_meets_bounds(obstacle, scenario.workspace):
            raise ScenarioValidationError(
                f"{scenario.name}: obstacle {index} lies entirely outside the workspace"
            )


class ScenarioParser:
    """Parser for YAML scenario files."""

    def __init__(self, default_cell_size: float = DEFAULT_CELL_SIZE,
                 default_sphere_radius: float = DEFAULT_SPHERE_RADIUS):
        self.default_cell_size = default_cell_size
        self.default_sphere_radius = default_sphere_radius

    def parse_file(self, file_path: Union[str, Path]) -> Scenario:
        """
        Parse and validate a scenario file.

        Args:
            file_path: Path to the YAML scenario

        Returns:
            Validated Scenario (grid not yet rasterized)

        Raises:
            ScenarioParseError: unreadable file or malformed content
            ScenarioValidationError: invariant violations
        """
        path = Path(file_path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except OSError as e:
            raise ScenarioParseError(f"Cannot read scenario file '{path}': {e}") from e
        except yaml.YAMLError as e:
            raise ScenarioParseError(f"Invalid YAML in scenario file '{path}': {e}") from e

        if not isinstance(data, dict):
            raise ScenarioParseError(f"Scenario file '{path}' must contain a mapping")

        try:
            scenario = self.parse_mapping(data, source_path=str(path))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ScenarioError):
                raise
            raise ScenarioParseError(f"Malformed scenario file '{path}': {e}") from e

        logger.info(
            "Loaded scenario '%s' (%s, %d DoF, %d obstacles) from %s",
            scenario.name, scenario.tier.value, scenario.dof, len(scenario.obstacles), path,
        )
        return scenario

    def parse_mapping(self, data: Dict[str, Any], source_path: Optional[str] = None) -> Scenario:
        """Build a Scenario from an already-loaded mapping."""
        version = int(data.get("schema_version", 1))
        if version not in SUPPORTED_SCHEMA_VERSIONS:
            raise ScenarioValidationError(f"Unsupported schema_version {version}")

        tier_name = str(data.get("tier", "EASY")).upper()
        try:
            tier = Tier(tier_name)
        except ValueError as e:
            raise ScenarioValidationError(f"Unknown tier '{tier_name}'") from e

        scenario = Scenario(
            name=str(data["name"]),
            tier=tier,
            workspace=self._parse_workspace(data["workspace"]),
            obstacles=tuple(self._parse_obstacle(o) for o in data.get("obstacles") or []),
            robot=self._parse_robot(data["robot"]),
            q_start=self._parse_angles(data["start_deg"]),
            q_goal=self._parse_angles(data["goal_deg"]),
            schema_version=version,
            description=str(data.get("description", "")),
            source_path=source_path,
        )
        validate_scenario(scenario)
        return scenario

    def _parse_point(self, value: Sequence[Any]) -> Point:
        if len(value) != 2:
            raise ValueError(f"expected a 2-D point, got {value!r}")
        return (float(value[0]), float(value[1]))

    def _parse_angles(self, values: Sequence[Any]) -> Tuple[float, ...]:
        return tuple(math.radians(float(v)) for v in values)

    def _parse_workspace(self, block: Dict[str, Any]) -> WorkspaceBounds:
        return WorkspaceBounds(
            min_corner=self._parse_point(block["min"]),
            max_corner=self._parse_point(block["max"]),
            cell_size=float(block.get("cell_size", self.default_cell_size)),
        )

    def _parse_obstacle(self, block: Dict[str, Any]) -> Obstacle:
        kind = str(block.get("type", "")).lower()
        if kind == "rect":
            return RectObstacle(self._parse_point(block["min"]), self._parse_point(block["max"]))
        if kind == "circle":
            return CircleObstacle(self._parse_point(block["center"]), float(block["radius"]))
        raise ValueError(f"unknown obstacle type '{kind}'")

    def _parse_robot(self, block: Dict[str, Any]) -> RobotSpec:
        limits: Optional[List[Tuple[float, float]]] = None
        if block.get("joint_limits_deg") is not None:
            limits = [
                (math.radians(float(lo)), math.radians(float(hi)))
                for lo, hi in block["joint_limits_deg"]
            ]
        spheres = block.get("spheres_per_link")
        return RobotSpec(
            link_lengths=tuple(float(v) for v in block["link_lengths"]),
            sphere_radius=float(block.get("sphere_radius", self.default_sphere_radius)),
            spheres_per_link=None if spheres is None else int(spheres),
            base=self._parse_point(block.get("base", (0.0, 0.0))),
            joint_limits=None if limits is None else tuple(limits),
        )


def load_scenario(path: Union[str, Path], default_cell_size: float = DEFAULT_CELL_SIZE,
                  default_sphere_radius: float = DEFAULT_SPHERE_RADIUS) -> Scenario:
    """Load and validate a scenario file."""
    return ScenarioParser(default_cell_size, default_sphere_radius).parse_file(path)
