"""
Distance transforms, the ground-truth seed oracle and node-map baselines
"""
import numpy as np
from scipy import ndimage

from ..engine.grid import GridGraph, Image, SeedSet, Segmentation, boundary_mask


def distance_transform(mask: np.ndarray, shape=None) -> np.ndarray:
    """Exact Euclidean distance from every node to the nearest True node.

    `mask` is per-node (flat, with `shape` given) or already 2-D.
    """
    mask = np.asarray(mask, dtype=bool)
    grid = mask.reshape(shape) if shape is not None else mask
    if grid.ndim == 1:
        grid = grid[None, :]
    if not grid.any():
        raise ValueError("distance transform needs at least one reference node")
    distances = ndimage.distance_transform_edt(~grid)
    return distances.reshape(mask.shape)


def _border_ring(graph: GridGraph) -> np.ndarray:
    ring = np.zeros(graph.shape, dtype=bool)
    ring[0, :] = ring[-1, :] = True
    ring[:, 0] = ring[:, -1] = True
    return ring.reshape(-1)


def boundary_distance(gt: Segmentation) -> np.ndarray:
    """Distance to the GT boundary; the image border ring stands in when there is none"""
    mask = boundary_mask(gt)
    if not mask.any():
        mask = _border_ring(gt.graph)
    return distance_transform(mask, gt.graph.shape)


def seed_oracle(gt: Segmentation) -> SeedSet:
    """One seed per GT region at maximal distance from the region boundary"""
    distances = boundary_distance(gt)
    seeds = []
    for label in np.unique(gt.labels):
        members = np.flatnonzero(gt.labels == label)
        # argmax returns the first maximum, i.e. the lowest node id
        seeds.append((int(members[np.argmax(distances[members])]), int(label)))
    return SeedSet(tuple(seeds))


def lift_to_edges(graph: GridGraph, node_values: np.ndarray) -> np.ndarray:
    """Edge altitude = maximum of the endpoint values"""
    us, vs = graph.endpoints()
    node_values = np.asarray(node_values, dtype=np.float64).reshape(-1)
    return np.maximum(node_values[us], node_values[vs])


def dtws_altitudes(g_map: np.ndarray, threshold: float, graph: GridGraph = None) -> np.ndarray:
    """Distance-transform watershed altitudes: flood the inverted background distances.

    `g_map` is a 2-D probability map, or a flat one together with `graph`.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    g_map = np.asarray(g_map, dtype=np.float64)
    if graph is None:
        if g_map.ndim != 2:
            raise ValueError("a flat g_map needs its graph")
        graph = GridGraph(*g_map.shape)
    g_map = g_map.reshape(-1)
    background = g_map < threshold
    if not background.any():
        raise ValueError("no background nodes below the threshold")
    if background.all():
        distances = np.zeros(graph.n_nodes)
    else:
        distances = distance_transform(~background, graph.shape)
    return lift_to_edges(graph, -distances)


def smooth_image(image: Image, sigma: float) -> Image:
    """Per-channel Gaussian smoothing with reflect padding; sigma 0 is the identity"""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return Image(image.graph, image.data.copy())
    array = image.as_array()
    smoothed = np.stack([ndimage.gaussian_filter(array[:, :, c], sigma, mode="reflect")
                         for c in range(image.channels)], axis=-1)
    return Image.from_array(smoothed)
