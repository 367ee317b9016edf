"""
Configuration lattice and successor containers.

Lattice states are integer coordinates anchored at the start configuration:
q = q_start + coord * m_prim.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

LatticeCoord = Tuple[int, ...]

# Node id of an off-lattice goal configuration.
GOAL_KEY = "goal"

NodeKey = Union[LatticeCoord, str]

# Relative tolerance (in multiples of m_prim) for recognising on-lattice configurations.
_ON_LATTICE_TOL = 1e-9


class PrimitiveMode(str, Enum):
    FIXED = "FIXED"
    BUR = "BUR"


class Provenance(str, Enum):
    BUR = "BUR"
    FIXED = "FIXED"
    GOAL_SNAP = "GOAL_SNAP"


@dataclass(frozen=True)
class PrimitiveParams:
    """
    Successor-generation parameters.

    ``snap_radius`` of None means the default gate of 2 * m_prim;
    ``math.inf`` attempts the goal connection from every expanded state.

    A bur spine of k > 1 multiples emits its endpoint and, with
    ``first_step``, the node one multiple along it, so every fixed primitive
    edge that a spine covers stays in the graph. ``intermediate_nodes``
    emits all k nodes.
    """
    m_prim: float
    d_crit: float = 0.03
    mode: PrimitiveMode = PrimitiveMode.BUR
    snap_radius: Optional[float] = None
    first_step: bool = True
    intermediate_nodes: bool = False

    def __post_init__(self):
        if not self.m_prim > 0:
            raise ValueError(f"m_prim must be positive, got {self.m_prim}")
        if not self.d_crit > 0:
            raise ValueError(f"d_crit must be positive, got {self.d_crit}")
        if self.snap_radius is not None and self.snap_radius < 0:
            raise ValueError(f"snap_radius must be non-negative, got {self.snap_radius}")
        object.__setattr__(self, "mode", PrimitiveMode(self.mode))

    @property
    def effective_snap_radius(self) -> float:
        return 2.0 * self.m_prim if self.snap_radius is None else self.snap_radius


@dataclass(frozen=True)
class Lattice:
    """Maps integer coordinates to configurations and back."""
    q_start: Tuple[float, ...]
    m_prim: float

    def __post_init__(self):
        object.__setattr__(self, "q_start", tuple(float(v) for v in self.q_start))

    @property
    def dof(self) -> int:
        return len(self.q_start)

    def config(self, coord: LatticeCoord) -> np.ndarray:
        return np.asarray(self.q_start) + np.asarray(coord, dtype=float) * self.m_prim

    def coord_of(self, q) -> Optional[LatticeCoord]:
        """Lattice coordinate of q, or None when q is off-lattice."""
        units = (np.asarray(q, dtype=float) - np.asarray(self.q_start)) / self.m_prim
        rounded = np.round(units)
        if np.all(np.abs(units - rounded) <= _ON_LATTICE_TOL * np.maximum(1.0, np.abs(rounded))):
            return tuple(int(v) for v in rounded)
        return None


@dataclass(frozen=True)
class SuccessorEntry:
    """One generated edge: target state, its configuration, cost and origin."""
    coord: NodeKey
    q: Tuple[float, ...]
    cost: float
    provenance: Provenance


@dataclass
class SuccessorSet:
    """Successors of one expansion. Ordered by generation: joint, then direction."""
    entries: List[SuccessorEntry] = field(default_factory=list)

    def add(self, entry: SuccessorEntry) -> None:
        self.entries.append(entry)

    def __iter__(self) -> Iterator[SuccessorEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def provenances(self) -> List[Provenance]:
        return [entry.provenance for entry in self.entries]

    def signature(self) -> List[Tuple[NodeKey, float, Provenance]]:
        """(coord, cost, provenance) triples, sorted, for set comparisons."""
        return sorted(((e.coord, e.cost, e.provenance) for e in self.entries), key=lambda t: (str(t[0]), t[1]))


def joint_directions(dof: int) -> List[Tuple[int, int]]:
    """The 2n signed single-joint directions as (joint index, sign)."""
    return [(joint, sign) for joint in range(dof) for sign in (1, -1)]


def step_coord(coord: LatticeCoord, joint: int, steps: int) -> LatticeCoord:
    moved = list(coord)
    moved[joint] += steps
    return tuple(moved)


def config_distance(q_a, q_b) -> float:
    """Euclidean C-space distance."""
    diff = np.asarray(q_a, dtype=float) - np.asarray(q_b, dtype=float)
    return float(np.sqrt(np.dot(diff, diff)))
