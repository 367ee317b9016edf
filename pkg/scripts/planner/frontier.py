"""
Search nodes and the OPEN / CLOSED / INCONS bookkeeping of the anytime search.

OPEN is a binary heap with lazy re-insertion: a node whose key changes is
pushed again and older heap entries are skipped when they surface.
Ties on f are broken by smaller h, then by lexicographic coordinate, with
the off-lattice goal ordered after every lattice coordinate.
"""
import heapq
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple

from primitives.lattice import GOAL_KEY, NodeKey, Provenance

INFINITY = math.inf


def tie_key(key: NodeKey) -> Tuple[int, Tuple[int, ...]]:
    if isinstance(key, str):
        return (1, ())
    return (0, key)


@dataclass
class SearchNode:
    """One visited state. g is infinite until a path to it is known."""
    key: NodeKey
    q: Tuple[float, ...]
    h: float
    g: float = INFINITY
    parent: Optional[NodeKey] = None
    provenance: Optional[Provenance] = None
    edge_cost: float = 0.0

    @property
    def is_goal(self) -> bool:
        return self.key == GOAL_KEY


class FrontierState:
    """OPEN, CLOSED and INCONS for one planning query."""

    def __init__(self, epsilon: float):
        self.epsilon = epsilon
        self.nodes: Dict[NodeKey, SearchNode] = {}
        self.closed: Set[NodeKey] = set()
        self.incons: Dict[NodeKey, None] = {}
        self._open: Dict[NodeKey, float] = {}
        self._heap: List[Tuple[float, float, Tuple[int, Tuple[int, ...]], NodeKey]] = []

    def register(self, key: NodeKey, q, h: float) -> SearchNode:
        """Return the node for key, creating it with g = inf on first visit."""
        node = self.nodes.get(key)
        if node is None:
            node = SearchNode(key=key, q=tuple(float(v) for v in q), h=h)
            self.nodes[key] = node
        return node

    def f_value(self, node: SearchNode) -> float:
        return node.g + self.epsilon * node.h

    def push(self, node: SearchNode) -> None:
        """Insert node into OPEN or update its key there."""
        f = self.f_value(node)
        self._open[node.key] = f
        heapq.heappush(self._heap, (f, node.h, tie_key(node.key), node.key))

    def _drop_stale(self) -> None:
        heap = self._heap
        while heap:
            f, _, _, key = heap[0]
            if self._open.get(key) == f:
                return
            heapq.heappop(heap)

    def pop(self) -> Optional[SearchNode]:
        """Remove and return the minimum-key node of OPEN, or None when OPEN is empty."""
        self._drop_stale()
        if not self._heap:
            return None
        _, _, _, key = heapq.heappop(self._heap)
        del self._open[key]
        return self.nodes[key]

    def min_f(self) -> float:
        self._drop_stale()
        return self._heap[0][0] if self._heap else INFINITY

    def in_open(self, key: NodeKey) -> bool:
        return key in self._open

    def open_keys(self) -> Iterator[NodeKey]:
        return iter(self._open)

    @property
    def open_size(self) -> int:
        return len(self._open)

    def close(self, node: SearchNode) -> None:
        self.closed.add(node.key)

    def defer(self, node: SearchNode) -> None:
        """Put a node into INCONS."""
        self.incons[node.key] = None

    def bound_denominator(self) -> float:
        """min over OPEN and INCONS of g + h (unweighted); inf when both are empty."""
        best = INFINITY
        for key in list(self._open) + list(self.incons):
            node = self.nodes[key]
            best = min(best, node.g + node.h)
        return best

    def rekey(self, epsilon: float) -> None:
        """
        Start the next iteration with a new inflation factor: move INCONS into
        OPEN, rebuild every key and clear CLOSED.
        """
        self.epsilon = epsilon
        keys = dict.fromkeys(list(self._open) + list(self.incons))
        self.incons.clear()
        self.closed.clear()
        self._open = {}
        self._heap = []
        for key in keys:
            node = self.nodes[key]
            f = self.f_value(node)
            self._open[key] = f
            self._heap.append((f, node.h, tie_key(key), key))
        heapq.heapify(self._heap)
