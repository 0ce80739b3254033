"""
Unstructured boundary model g - pixelwise boundary probabilities used to augment the input
"""
import logging
import warnings
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import expit
from sklearn.exceptions import ConvergenceWarning
from sklearn.neural_network import MLPClassifier

from ..engine.grid import Image, Segmentation, boundary_mask
from ..utils.config import GConfig, ModelKinds
from .features import all_patches, extract_patch
from .params import ModelParams

logger = logging.getLogger(__name__)


def _check_layout(params: ModelParams, image: Image):
    params.expect(ModelKinds.BOUNDARY)
    if params.channels != image.channels:
        raise ValueError(f"g expects {params.channels} channels, image has {image.channels}")


def _forward(params: ModelParams, features: np.ndarray) -> np.ndarray:
    blocks = params.blocks()
    hidden = np.tanh(features @ blocks["hidden_w"].T + blocks["hidden_b"])
    return expit(hidden @ blocks["readout_w"] + blocks["readout_b"][0])


def predict_g(params: ModelParams, image: Image, node: int) -> float:
    """Probability that `node` lies on a region boundary"""
    _check_layout(params, image)
    features = extract_patch(image, node, params.patch_radius)[None, :]
    return float(_forward(params, features)[0])


def predict_g_map(params: ModelParams, image: Image) -> np.ndarray:
    """predict_g for every node at once"""
    _check_layout(params, image)
    return _forward(params, all_patches(image, params.patch_radius))


def _balanced_sample(mask: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    positives, negatives = np.flatnonzero(mask), np.flatnonzero(~mask)
    half = count // 2
    picks = []
    for pool, want in ((positives, half), (negatives, count - half)):
        if pool.size:
            picks.append(rng.choice(pool, size=want, replace=pool.size < want))
    return np.concatenate(picks)


def train_g(corpus: Sequence[Tuple[Image, Segmentation]],
            config: GConfig) -> Tuple[ModelParams, List[float]]:
    """Fit g by minibatch SGD on pixelwise cross-entropy against boundary_mask"""
    if not corpus:
        raise ValueError("cannot train g on an empty corpus")
    channels = corpus[0][0].channels
    rng = np.random.default_rng(config.rng_seed)

    features, targets = [], []
    for image, gt in corpus:
        if image.channels != channels:
            raise ValueError("all corpus images must share one channel count")
        mask = boundary_mask(gt)
        nodes = _balanced_sample(mask, config.samples_per_image, rng)
        features.append(all_patches(image, config.patch_radius)[nodes])
        targets.append(mask[nodes].astype(np.int64))
    X, y = np.concatenate(features), np.concatenate(targets)
    if np.unique(y).size < 2:
        raise ValueError("corpus must contain both boundary and interior nodes")
    logger.info(f"Training g on {X.shape[0]} samples with {X.shape[1]} features")

    classifier = MLPClassifier(hidden_layer_sizes=(config.hidden_size,), activation="tanh",
                               solver="sgd", learning_rate_init=config.learning_rate,
                               momentum=config.momentum, batch_size=config.batch_size,
                               max_iter=config.epochs, tol=0.0, n_iter_no_change=config.epochs + 1,
                               shuffle=True, random_state=config.rng_seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        classifier.fit(X, y)
    for warning in caught:
        if issubclass(warning.category, ConvergenceWarning):
            logger.warning(f"g training: {warning.message}")

    theta = np.concatenate([
        classifier.coefs_[0].T.ravel(),
        classifier.intercepts_[0],
        classifier.coefs_[1][:, 0],
        classifier.intercepts_[1],
    ])
    params = ModelParams(ModelKinds.BOUNDARY, channels, config.patch_radius,
                         config.hidden_size, 0, theta)
    trace = [float(loss) for loss in classifier.loss_curve_]
    if not np.all(np.isfinite(trace)):
        raise ValueError("g training produced a non-finite loss")
    logger.info(f"g training finished after {len(trace)} epochs, final loss {trace[-1]:.4f}")
    return params, trace


def augment(image: Image, g_params: ModelParams) -> Image:
    """Append the g boundary probability as an extra channel"""
    g_map = predict_g_map(g_params, image)
    return Image(image.graph, np.column_stack([image.data, g_map]))
