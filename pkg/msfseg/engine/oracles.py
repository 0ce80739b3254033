"""
Brute-force reference implementations used to validate grow()
"""
from typing import Dict, Union

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .grid import GridGraph, SeedSet, Segmentation

MAX_PATH_ORACLE_NODES = 12
MAX_MSF_ORACLE_NODES = 256

Altitudes = Union[np.ndarray, Dict[int, float]]


def _as_array(graph: GridGraph, altitudes: Altitudes) -> np.ndarray:
    if isinstance(altitudes, dict):
        array = np.full(graph.n_edges, np.inf)
        for edge, value in altitudes.items():
            array[edge] = value
        return array
    array = np.asarray(altitudes, dtype=np.float64).reshape(-1)
    if array.shape[0] != graph.n_edges:
        raise ValueError(f"{array.shape[0]} altitudes for {graph.n_edges} edges")
    return array


def topographic_distance_oracle(graph: GridGraph, altitudes: Altitudes, m: int, w: int) -> float:
    """Min over all simple paths m -> w of the path's highest altitude"""
    if graph.n_nodes > MAX_PATH_ORACLE_NODES:
        raise ValueError(f"path oracle limited to {MAX_PATH_ORACLE_NODES} nodes")
    if m == w:
        return -np.inf
    altitude = _as_array(graph, altitudes)
    best = np.inf
    visited = {m}

    def search(node: int, current: float):
        nonlocal best
        if current >= best:
            return
        if node == w:
            best = current
            return
        for edge, neighbor in graph.incident_edges(node):
            if neighbor in visited:
                continue
            visited.add(neighbor)
            search(neighbor, max(current, altitude[edge]))
            visited.remove(neighbor)

    search(m, -np.inf)
    return float(best)


def msf_oracle(graph: GridGraph, altitudes: Altitudes, seeds: SeedSet) -> Segmentation:
    """Kruskal minimum spanning forest with the seeds as fixed roots"""
    if graph.n_nodes > MAX_MSF_ORACLE_NODES:
        raise ValueError(f"MSF oracle limited to {MAX_MSF_ORACLE_NODES} nodes")
    altitude = _as_array(graph, altitudes)
    us, vs = graph.endpoints()
    components = DisjointSet(range(graph.n_nodes))
    label = {node: lab for node, lab in seeds.seeds}

    for edge in np.argsort(altitude, kind="stable"):
        if not np.isfinite(altitude[edge]):
            break
        u, v = int(us[edge]), int(vs[edge])
        root_u, root_v = components[u], components[v]
        if root_u == root_v:
            continue
        label_u, label_v = label.get(root_u, 0), label.get(root_v, 0)
        if label_u and label_v:
            continue
        components.merge(u, v)
        label[components[u]] = label_u or label_v

    labels = np.array([label.get(components[node], 0) for node in range(graph.n_nodes)])
    return Segmentation(graph, labels)
