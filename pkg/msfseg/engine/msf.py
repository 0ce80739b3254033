"""
Seeded watershed region growing - Prim's algorithm over a pluggable altitude provider
"""
import heapq
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from ..utils.errors import ContractViolation
from .grid import GridGraph, Image, SeedSet, Segmentation

logger = logging.getLogger(__name__)

_EMPTY = np.zeros(0)
_EMPTY.setflags(write=False)


class AltitudeProvider(ABC):
    """Edge altitude function evaluated on demand during growth.

    Higher altitudes mean stronger boundary evidence. `evaluate` receives the
    live assignment array and must not modify it.
    """

    hidden_size: int = 0

    def bind(self, image: Image) -> "AltitudeProvider":
        """Return a provider for one growth run on `image`"""
        return self

    @abstractmethod
    def evaluate(self, edge: int, u: int, v: int, assignment: np.ndarray,
                 hidden: np.ndarray) -> Tuple[float, np.ndarray]:
        """Altitude of edge u -> v and the hidden state handed to v"""


class FixedAltitude(AltitudeProvider):
    """Precomputed per-edge altitudes, ignoring assignment and history"""

    def __init__(self, altitudes: np.ndarray):
        altitudes = np.asarray(altitudes, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(altitudes)):
            raise ValueError("altitudes must be finite")
        self.altitudes = altitudes

    def evaluate(self, edge, u, v, assignment, hidden):
        return float(self.altitudes[edge]), _EMPTY


@dataclass
class GrowthRecord:
    """Full trace of one seeded growth run"""
    graph: GridGraph
    seeds: SeedSet
    forbidden: FrozenSet[int]
    assignment: np.ndarray
    parent_edge: np.ndarray
    parent_node: np.ndarray
    path_max: np.ndarray
    bottleneck_edge: np.ndarray
    order: np.ndarray
    hidden: np.ndarray
    evaluated_altitude: Dict[int, float] = field(default_factory=dict)
    evaluated_source: Dict[int, int] = field(default_factory=dict)

    @property
    def n_seeds(self) -> int:
        return len(self.seeds)

    @property
    def hidden_size(self) -> int:
        return self.hidden.shape[1]

    @property
    def unassigned_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.assignment == 0)

    @property
    def is_complete(self) -> bool:
        return bool(np.all(self.assignment > 0))

    def tree_edges(self) -> FrozenSet[int]:
        return frozenset(int(e) for e in self.parent_edge[self.parent_edge >= 0])

    def labels_seen_from(self, node: int, nodes: Optional[np.ndarray] = None) -> np.ndarray:
        """Labels of `nodes` (default all) as they stood while the edges leaving
        `node` were evaluated. All seeds are assigned before any evaluation."""
        if self.order[node] < 0:
            raise ContractViolation(f"node {node} was never assigned")
        horizon = max(int(self.order[node]), self.n_seeds - 1)
        order = self.order if nodes is None else self.order[nodes]
        labels = self.assignment if nodes is None else self.assignment[nodes]
        return np.where((order >= 0) & (order <= horizon), labels, 0)

    def other_endpoint(self, edge: int, node: int) -> int:
        us, vs = self.graph.endpoints()
        return int(vs[edge]) if us[edge] == node else int(us[edge])


def grow(graph: GridGraph, image: Optional[Image], seeds: SeedSet, provider: AltitudeProvider,
         forbidden: Optional[Iterable[int]] = None) -> GrowthRecord:
    """Grow all seeds competitively, always accepting the lowest frontier edge.

    Queue keys are (altitude, insertion counter). Altitudes are frozen when an edge
    enters the frontier; stale entries are dropped on pop. Forbidden edges never
    enter the frontier, so nodes only reachable through them stay unassigned.
    """
    if not isinstance(seeds, SeedSet):
        seeds = SeedSet(tuple(seeds))
    if image is not None:
        if image.graph != graph:
            raise ValueError(f"image grid {image.graph.shape} does not match graph {graph.shape}")
        provider = provider.bind(image)

    n = graph.n_nodes
    forbidden = frozenset(int(e) for e in (forbidden or ()))
    blocked = np.zeros(graph.n_edges, dtype=bool)
    if forbidden:
        ids = np.fromiter(forbidden, dtype=np.int64)
        if ids.min() < 0 or ids.max() >= graph.n_edges:
            raise IndexError("forbidden edge id out of range")
        blocked[ids] = True

    r = provider.hidden_size
    assignment = np.zeros(n, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    parent_node = np.full(n, -1, dtype=np.int64)
    path_max = np.full(n, np.inf)
    bottleneck = np.full(n, -1, dtype=np.int64)
    order = np.full(n, -1, dtype=np.int64)
    hidden = np.zeros((n, r))
    evaluated: Dict[int, float] = {}
    source: Dict[int, int] = {}

    edge_table, neighbor_table = graph.neighbor_table()
    heap: List[tuple] = []
    counter = 0

    def expand(u: int):
        nonlocal counter
        for e, v in zip(edge_table[u], neighbor_table[u]):
            if e < 0 or blocked[e] or assignment[v]:
                continue
            altitude, hidden_v = provider.evaluate(int(e), u, int(v), assignment, hidden[u])
            altitude = float(altitude)
            if not np.isfinite(altitude):
                raise ContractViolation(f"provider returned non-finite altitude for edge {e}")
            evaluated[int(e)] = altitude
            source[int(e)] = u
            heapq.heappush(heap, (altitude, counter, int(e), u, int(v), hidden_v))
            counter += 1

    for rank, (node, label) in enumerate(seeds.seeds):
        if not 0 <= node < n:
            raise IndexError(f"seed node {node} out of range")
        assignment[node] = label
        path_max[node] = -np.inf
        order[node] = rank
    for node in seeds.nodes:
        expand(node)

    rank = len(seeds)
    while heap:
        altitude, _, e, u, v, hidden_v = heapq.heappop(heap)
        if assignment[v]:
            continue
        assignment[v] = assignment[u]
        parent_edge[v] = e
        parent_node[v] = u
        if altitude >= path_max[u]:
            path_max[v] = altitude
            bottleneck[v] = e
        else:
            path_max[v] = path_max[u]
            bottleneck[v] = bottleneck[u]
        order[v] = rank
        rank += 1
        if r:
            hidden[v] = hidden_v
        expand(v)

    record = GrowthRecord(graph=graph, seeds=seeds, forbidden=forbidden, assignment=assignment,
                          parent_edge=parent_edge, parent_node=parent_node, path_max=path_max,
                          bottleneck_edge=bottleneck, order=order, hidden=hidden,
                          evaluated_altitude=evaluated, evaluated_source=source)
    missing = n - rank
    if missing:
        logger.debug(f"Growth left {missing} of {n} nodes unassigned")
    return record


def segmentation_of(record: GrowthRecord) -> Segmentation:
    return Segmentation(record.graph, record.assignment.copy())


def path_to_seed(record: GrowthRecord, node: int) -> List[int]:
    """Edge ids from the node's seed down to the node"""
    if not 0 <= node < record.graph.n_nodes:
        raise IndexError(f"node {node} out of range")
    if record.assignment[node] == 0:
        raise ContractViolation(f"node {node} is unassigned")
    path = []
    while record.parent_edge[node] >= 0:
        path.append(int(record.parent_edge[node]))
        node = int(record.parent_node[node])
    path.reverse()
    return path
