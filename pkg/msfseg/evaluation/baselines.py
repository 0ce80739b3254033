"""
Segmentation methods compared in reports: learned altitude models and the node-map watershed
baselines, plus grid search of the baseline smoothing and threshold on training data
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..data.transforms import dtws_altitudes, lift_to_edges, smooth_image
from ..engine.grid import Image, SeedSet, Segmentation
from ..engine.msf import FixedAltitude, grow, segmentation_of
from ..models.altitude import make_provider
from ..models.boundary import augment, predict_g_map
from ..models.params import ModelParams
from ..utils.config import EvalConfig, ModelKinds, SegmentMethods
from .metrics import arand

logger = logging.getLogger(__name__)

BASELINE_METHODS = (SegmentMethods.G_WS, SegmentMethods.G_DTWS, SegmentMethods.RAW_WS)
LEARNED_METHODS = {SegmentMethods.LEARNED_DYNAMIC: ModelKinds.DYNAMIC,
                   SegmentMethods.LEARNED_STATIC: ModelKinds.STATIC}


@dataclass(frozen=True)
class BaselineSettings:
    sigma: float = 0.0
    threshold: Optional[float] = None


def _g_image(image: Image, g_params: ModelParams) -> Image:
    return Image(image.graph, predict_g_map(g_params, image))


def baseline_altitudes(method: str, image: Image, settings: BaselineSettings,
                       g_params: Optional[ModelParams] = None) -> np.ndarray:
    """Per-edge altitudes of a node-map baseline"""
    if method == SegmentMethods.RAW_WS:
        smoothed = smooth_image(image, settings.sigma)
        return lift_to_edges(image.graph, smoothed.data.mean(axis=1))
    if g_params is None:
        raise ValueError(f"{method} needs a pretrained g model")
    smoothed = smooth_image(_g_image(image, g_params), settings.sigma)
    if method == SegmentMethods.G_WS:
        return lift_to_edges(image.graph, smoothed.data[:, 0])
    if method == SegmentMethods.G_DTWS:
        if settings.threshold is None:
            raise ValueError("g+DTWS needs a threshold")
        return dtws_altitudes(smoothed.data[:, 0], settings.threshold, image.graph)
    raise ValueError(f"unknown baseline method {method!r}")


def segment_baseline(method: str, image: Image, seeds: SeedSet, settings: BaselineSettings,
                     g_params: Optional[ModelParams] = None) -> Segmentation:
    altitudes = baseline_altitudes(method, image, settings, g_params)
    return segmentation_of(grow(image.graph, image, seeds, FixedAltitude(altitudes)))


def segment_learned(params: ModelParams, image: Image, seeds: SeedSet,
                    g_params: Optional[ModelParams] = None) -> Segmentation:
    """Grow with a learned altitude model; `image` is augmented with g when one is given"""
    if g_params is not None:
        image = augment(image, g_params)
    return segmentation_of(grow(image.graph, image, seeds, make_provider(params)))


def select_baseline_settings(method: str, corpus: Sequence, eval_config: EvalConfig,
                             g_params: Optional[ModelParams] = None) -> BaselineSettings:
    """Grid search over eval.sigmas (and eval.thresholds for g+DTWS): lowest mean ARAND wins,
    ties keep the first lattice point"""
    thresholds = eval_config.thresholds if method == SegmentMethods.G_DTWS else (None,)
    best, best_error = None, np.inf
    for sigma, threshold in itertools.product(eval_config.sigmas, thresholds):
        settings = BaselineSettings(sigma=float(sigma), threshold=threshold)
        try:
            errors = [arand(segment_baseline(method, s.image, s.seeds, settings, g_params), s.gt,
                            eval_config.tolerance, eval_config.adapted) for s in corpus]
        except ValueError as e:
            logger.debug(f"{method} settings {settings} skipped: {str(e)}")
            continue
        error = float(np.mean(errors))
        logger.debug(f"{method} sigma={sigma} threshold={threshold}: mean ARAND {error:.4f}")
        if error < best_error:
            best, best_error = settings, error
    if best is None:
        raise ValueError(f"no admissible {method} settings in the search lattice")
    logger.info(f"Selected {method} settings {best} (train ARAND {best_error:.4f})")
    return best
