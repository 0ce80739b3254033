"""
Synthetic benchmark: regions from the sign of a smoothed Gaussian random field, observed
through a blurred and noise-corrupted edge image
"""
import logging
from typing import List, Tuple

import numpy as np
from scipy import ndimage

from ..engine.grid import GridGraph, Image, Segmentation, boundary_mask, relabel_sequential
from ..utils.config import SynthConfig

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 8
MIN_REGION_SIZE = 2


def _sign_components(positive: np.ndarray) -> np.ndarray:
    """4-connected components of both signs, labeled 1..n"""
    positive_labels, n_positive = ndimage.label(positive)
    negative_labels, _ = ndimage.label(~positive)
    return positive_labels + np.where(negative_labels > 0, negative_labels + n_positive, 0)


def _merge_tiny_regions(labels: np.ndarray, graph: GridGraph) -> np.ndarray:
    """Fold regions smaller than MIN_REGION_SIZE into their largest neighbor"""
    flat = labels.reshape(-1).copy()
    while True:
        sizes = np.bincount(flat)
        tiny = np.flatnonzero((sizes > 0) & (sizes < MIN_REGION_SIZE))
        if not tiny.size:
            return flat.reshape(labels.shape)
        label = tiny[0]
        members = np.flatnonzero(flat == label)
        neighbors = {int(flat[w]) for node in members
                     for _, w in graph.incident_edges(int(node)) if flat[w] != label}
        if not neighbors:
            return flat.reshape(labels.shape)
        target = max(sorted(neighbors), key=lambda lab: sizes[lab])
        flat[members] = target


def generate(config: SynthConfig) -> Tuple[Image, Segmentation]:
    """Sample one (image, ground truth) pair; a pure function of `config`"""
    graph = GridGraph(config.height, config.width)
    streams = np.random.SeedSequence(config.rng_seed).spawn(MAX_ATTEMPTS)
    for attempt, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        latent = ndimage.gaussian_filter(rng.standard_normal(config.size),
                                         config.effective_sigma_process, mode="reflect")
        positive = latent > 0
        if positive.all() or not positive.any():
            logger.warning(f"Degenerate latent field on attempt {attempt + 1} (seed {config.rng_seed})")
            continue
        labels = _merge_tiny_regions(_sign_components(positive), graph)
        gt = Segmentation(graph, relabel_sequential(labels.reshape(-1)))

        edges = boundary_mask(gt).reshape(config.size).astype(np.float64)
        if config.sigma_blur > 0:
            edges = ndimage.gaussian_filter(edges, config.sigma_blur, mode="reflect")
        if config.sigma_noise > 0:
            edges = edges + config.sigma_noise * rng.standard_normal(config.size)
        return Image.from_array(edges), gt
    raise ValueError(f"latent field stayed single-signed after {MAX_ATTEMPTS} attempts "
                     f"(seed {config.rng_seed})")


def derive_seeds(run_seed: int, count: int) -> List[int]:
    """Independent per-image RNG seeds spawned from one run seed"""
    children = np.random.SeedSequence(run_seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]
