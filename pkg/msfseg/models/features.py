"""
Patch extraction and relative assignment projection
"""
from functools import lru_cache

import numpy as np

from ..engine.grid import GridGraph, Image
from .params import N_PROJECTION


@lru_cache(maxsize=32)
def window_ids(height: int, width: int, radius: int) -> np.ndarray:
    """(|V|, (2r+1)^2) node ids of each node's reflect-padded window, row-major"""
    ids = np.arange(height * width, dtype=np.int64).reshape(height, width)
    padded = np.pad(ids, radius, mode="reflect")
    size = 2 * radius + 1
    windows = np.lib.stride_tricks.sliding_window_view(padded, (size, size))
    table = np.ascontiguousarray(windows.reshape(height * width, size * size))
    table.setflags(write=False)
    return table


def graph_windows(graph: GridGraph, radius: int) -> np.ndarray:
    if radius < 0:
        raise ValueError("patch radius must be non-negative")
    return window_ids(graph.height, graph.width, radius)


def extract_patch(image: Image, center: int, radius: int) -> np.ndarray:
    """Window values around `center`, row-major with channels innermost"""
    ids = graph_windows(image.graph, radius)[center]
    return image.data[ids].reshape(-1)


def all_patches(image: Image, radius: int) -> np.ndarray:
    """(|V|, window * channels) patch matrix"""
    ids = graph_windows(image.graph, radius)
    return image.data[ids].reshape(image.graph.n_nodes, -1)


def projection_codes(labels: np.ndarray, reference_label: int) -> np.ndarray:
    """0 = me, 1 = nobody, 2 = them"""
    return np.where(labels == reference_label, 0, np.where(labels == 0, 1, 2))


def project_relative(assignment: np.ndarray, reference_label: int) -> np.ndarray:
    """Per-node one-hot (me, nobody, them) relative to `reference_label`"""
    if reference_label < 1:
        raise ValueError("reference label must be a positive region label")
    codes = projection_codes(np.asarray(assignment), reference_label)
    return np.eye(N_PROJECTION)[codes]


def projection_patch(window_labels: np.ndarray, reference_label: int) -> np.ndarray:
    """Flattened one-hot projection of one window, channels innermost"""
    return np.eye(N_PROJECTION)[projection_codes(window_labels, reference_label)].reshape(-1)
