"""
Planner parameters and the per-robot-class defaults.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional

from primitives.lattice import PrimitiveMode, PrimitiveParams


class InconsPolicy(str, Enum):
    # A node whose g improves while it is closed is deferred to INCONS.
    STANDARD = "standard"
    # Inverted branch: a closed node whose g did not improve is deferred,
    # an improved closed node is dropped.
    LITERAL = "literal"


@dataclass(frozen=True)
class RobotClassDefaults:
    epsilon_init: float
    t_plan: float
    t_repair: float


# Initial inflation and time budgets (seconds) per manipulator class.
ROBOT_CLASS_DEFAULTS: Dict[str, RobotClassDefaults] = {
    "2dof": RobotClassDefaults(epsilon_init=10.0, t_plan=5.0, t_repair=1.0),
    "7dof": RobotClassDefaults(epsilon_init=50.0, t_plan=60.0, t_repair=40.0),
}

DEFAULT_DELTA_EPSILON = 0.5
# for_dof keywords routed to PrimitiveParams.
PRIMITIVE_OVERRIDES = ("d_crit", "snap_radius", "first_step", "intermediate_nodes")


def robot_class(dof: int) -> str:
    return "2dof" if dof <= 3 else "7dof"


@dataclass(frozen=True)
class PlannerParams:
    """
    Anytime search parameters.

    ``max_expansions`` caps the total number of expansions across all
    iterations on top of the time budgets.
    """
    epsilon_init: float
    t_plan: float
    t_repair: float
    primitives: PrimitiveParams
    delta_epsilon: float = DEFAULT_DELTA_EPSILON
    incons_policy: InconsPolicy = InconsPolicy.STANDARD
    max_expansions: Optional[int] = None
    record_expansions: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.epsilon_init >= 1.0:
            raise ValueError(f"epsilon_init must be at least 1, got {self.epsilon_init}")
        if not self.delta_epsilon > 0:
            raise ValueError(f"delta_epsilon must be positive, got {self.delta_epsilon}")
        for name in ("t_plan", "t_repair"):
            value = getattr(self, name)
            if not value > 0 or math.isnan(value):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.max_expansions is not None and self.max_expansions < 0:
            raise ValueError(f"max_expansions must be non-negative, got {self.max_expansions}")
        object.__setattr__(self, "incons_policy", InconsPolicy(self.incons_policy))

    @classmethod
    def for_dof(cls, dof: int, m_prim: float, mode: PrimitiveMode = PrimitiveMode.BUR,
                **overrides: Any) -> "PlannerParams":
        """
        Defaults for a robot with ``dof`` joints; DoF <= 3 uses the 2-DoF class.

        Keyword overrides go to PlannerParams fields or, for d_crit,
        snap_radius, first_step and intermediate_nodes, to the primitive parameters.
        """
        defaults = ROBOT_CLASS_DEFAULTS[robot_class(dof)]
        primitive_fields = {k: overrides.pop(k) for k in PRIMITIVE_OVERRIDES if k in overrides}
        primitive_fields = {k: v for k, v in primitive_fields.items() if v is not None}
        primitives = PrimitiveParams(m_prim=m_prim, mode=mode, **primitive_fields)
        params = cls(
            epsilon_init=defaults.epsilon_init,
            t_plan=defaults.t_plan,
            t_repair=defaults.t_repair,
            primitives=primitives,
        )
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(params, **overrides) if overrides else params

    @property
    def mode(self) -> PrimitiveMode:
        return self.primitives.mode

    def with_mode(self, mode: PrimitiveMode) -> "PlannerParams":
        return replace(self, primitives=replace(self.primitives, mode=PrimitiveMode(mode)))

    def to_dict(self) -> Dict[str, Any]:
        snap = self.primitives.effective_snap_radius
        return {
            "epsilon_init": self.epsilon_init,
            "delta_epsilon": self.delta_epsilon,
            "t_plan": self.t_plan,
            "t_repair": self.t_repair,
            "incons_policy": self.incons_policy.value,
            "max_expansions": self.max_expansions,
            "primitives": {
                "mode": self.primitives.mode.value,
                "m_prim": self.primitives.m_prim,
                "m_prim_deg": math.degrees(self.primitives.m_prim),
                "d_crit": self.primitives.d_crit,
                "snap_radius": "unbounded" if math.isinf(snap) else snap,
                "first_step": self.primitives.first_step,
                "intermediate_nodes": self.primitives.intermediate_nodes,
            },
        }
