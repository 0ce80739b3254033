"""
Grid graph, image and segmentation containers with canonical node/edge indexing
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from ..utils.errors import ContractViolation

# Neighbor enumeration order; also the direction code of an edge traversed u -> v
LEFT, RIGHT, UP, DOWN = 0, 1, 2, 3
N_DIRECTIONS = 4


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=64)
def _edge_table(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    ids = np.arange(height * width, dtype=np.int64).reshape(height, width)
    horizontal_u, horizontal_v = ids[:, :-1].ravel(), ids[:, 1:].ravel()
    vertical_u, vertical_v = ids[:-1, :].ravel(), ids[1:, :].ravel()
    return (_frozen(np.concatenate([horizontal_u, vertical_u])),
            _frozen(np.concatenate([horizontal_v, vertical_v])))


@lru_cache(maxsize=64)
def _neighbor_table(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """(|V|, 4) edge ids and neighbor ids in L, R, U, D order; -1 where absent"""
    n = height * width
    n_horizontal = height * (width - 1)
    edges = np.full((n, N_DIRECTIONS), -1, dtype=np.int64)
    neighbors = np.full((n, N_DIRECTIONS), -1, dtype=np.int64)
    rows, cols = np.divmod(np.arange(n, dtype=np.int64), width)
    has = cols > 0
    edges[has, LEFT] = rows[has] * (width - 1) + cols[has] - 1
    neighbors[has, LEFT] = np.flatnonzero(has) - 1
    has = cols < width - 1
    edges[has, RIGHT] = rows[has] * (width - 1) + cols[has]
    neighbors[has, RIGHT] = np.flatnonzero(has) + 1
    has = rows > 0
    edges[has, UP] = n_horizontal + (rows[has] - 1) * width + cols[has]
    neighbors[has, UP] = np.flatnonzero(has) - width
    has = rows < height - 1
    edges[has, DOWN] = n_horizontal + rows[has] * width + cols[has]
    neighbors[has, DOWN] = np.flatnonzero(has) + width
    return _frozen(edges), _frozen(neighbors)


@dataclass(frozen=True)
class GridGraph:
    """4-connected height x width lattice; node id = row * width + col"""
    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.height}x{self.width}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def n_nodes(self) -> int:
        return self.height * self.width

    @property
    def n_horizontal(self) -> int:
        return self.height * (self.width - 1)

    @property
    def n_edges(self) -> int:
        return self.n_horizontal + (self.height - 1) * self.width

    def endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """Arrays (u, v) of canonical endpoints for every edge, u < v"""
        return _edge_table(self.height, self.width)

    def neighbor_table(self) -> Tuple[np.ndarray, np.ndarray]:
        return _neighbor_table(self.height, self.width)

    def edge_endpoints(self, edge: int) -> Tuple[int, int]:
        if not 0 <= edge < self.n_edges:
            raise IndexError(f"edge {edge} out of range for {self.n_edges} edges")
        us, vs = self.endpoints()
        return int(us[edge]), int(vs[edge])

    def edge_id(self, u: int, v: int) -> int:
        """Inverse of edge_endpoints for adjacent nodes (either order)"""
        u, v = min(u, v), max(u, v)
        self._check_node(u)
        self._check_node(v)
        if v == u + 1 and v % self.width != 0:
            row, col = divmod(u, self.width)
            return row * (self.width - 1) + col
        if v == u + self.width:
            return self.n_horizontal + u
        raise ValueError(f"nodes {u} and {v} are not adjacent")

    def incident_edges(self, node: int) -> List[Tuple[int, int]]:
        """(edge id, neighbor) pairs in left, right, up, down order"""
        self._check_node(node)
        edges, neighbors = self.neighbor_table()
        return [(int(e), int(w)) for e, w in zip(edges[node], neighbors[node]) if e >= 0]

    def direction(self, u: int, v: int) -> int:
        """Direction code of the step u -> v"""
        delta = v - u
        if delta == -1:
            return LEFT
        if delta == 1:
            return RIGHT
        if delta == -self.width:
            return UP
        if delta == self.width:
            return DOWN
        raise ValueError(f"nodes {u} and {v} are not adjacent")

    def _check_node(self, node: int):
        if not 0 <= node < self.n_nodes:
            raise IndexError(f"node {node} out of range for {self.n_nodes} nodes")


@dataclass(frozen=True, eq=False)
class Image:
    """Multi-channel node data, stored as a read-only (|V|, D) float array"""
    graph: GridGraph
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] != self.graph.n_nodes or data.shape[1] < 1:
            raise ValueError(f"image data of shape {data.shape} does not fit {self.graph.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image data must be finite")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Image":
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 2:
            array = array[:, :, None]
        height, width, channels = array.shape
        return cls(GridGraph(height, width), array.reshape(height * width, channels))

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    def as_array(self) -> np.ndarray:
        return self.data.reshape(self.graph.height, self.graph.width, self.channels)


@dataclass(frozen=True, eq=False)
class Segmentation:
    """Per-node labels; 0 marks an unassigned node"""
    graph: GridGraph
    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != self.graph.n_nodes:
            raise ValueError(f"{labels.shape[0]} labels for {self.graph.n_nodes} nodes")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be non-negative")
        object.__setattr__(self, "labels", _frozen(labels))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Segmentation":
        array = np.asarray(array)
        if array.ndim == 3:
            array = array[:, :, 0]
        return cls(GridGraph(*array.shape), array.reshape(-1))

    @property
    def is_complete(self) -> bool:
        return bool(np.all(self.labels > 0))

    @property
    def n_regions(self) -> int:
        return int(np.unique(self.labels[self.labels > 0]).size)

    def as_array(self) -> np.ndarray:
        return self.labels.reshape(self.graph.shape)


@dataclass(frozen=True)
class SeedSet:
    """Ordered (node, label) pairs; labels are exactly 1..n"""
    seeds: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        seeds = tuple((int(node), int(label)) for node, label in self.seeds)
        object.__setattr__(self, "seeds", seeds)
        if not seeds:
            raise ValueError("seed set is empty")
        nodes = [node for node, _ in seeds]
        labels = [label for _, label in seeds]
        if len(set(labels)) != len(labels):
            raise ValueError(f"seed labels must be distinct, got {labels}")
        if sorted(labels) != list(range(1, len(labels) + 1)):
            raise ValueError(f"seed labels must be 1..{len(labels)}, got {sorted(labels)}")
        if len(set(nodes)) != len(nodes):
            raise ValueError("seed nodes must be distinct")

    @classmethod
    def from_nodes(cls, nodes: Iterable[int]) -> "SeedSet":
        """Label nodes 1..n in the given order"""
        return cls(tuple((node, label) for label, node in enumerate(nodes, start=1)))

    def __len__(self) -> int:
        return len(self.seeds)

    @property
    def nodes(self) -> List[int]:
        return [node for node, _ in self.seeds]

    @property
    def labels(self) -> List[int]:
        return [label for _, label in self.seeds]


def _require_complete(seg: Segmentation):
    if not seg.is_complete:
        raise ContractViolation("operation requires a complete segmentation (no unassigned nodes)")


def cut_mask(seg: Segmentation) -> np.ndarray:
    """Boolean per-edge mask of edges whose endpoints carry different labels"""
    _require_complete(seg)
    us, vs = seg.graph.endpoints()
    return seg.labels[us] != seg.labels[vs]


def cut_set(seg: Segmentation) -> FrozenSet[int]:
    return frozenset(int(e) for e in np.flatnonzero(cut_mask(seg)))


def boundary_mask(seg: Segmentation) -> np.ndarray:
    """Per-node mask of nodes touching at least one cut edge"""
    cut = cut_mask(seg)
    us, vs = seg.graph.endpoints()
    mask = np.zeros(seg.graph.n_nodes, dtype=bool)
    mask[us[cut]] = True
    mask[vs[cut]] = True
    return mask


def relabel_sequential(labels: Sequence[int]) -> np.ndarray:
    """Map positive labels onto 1..n in order of first value, keeping 0"""
    labels = np.asarray(labels, dtype=np.int64)
    values, inverse = np.unique(labels, return_inverse=True)
    offset = 0 if values.size and values[0] == 0 else 1
    return (inverse + offset).astype(np.int64).reshape(labels.shape)
