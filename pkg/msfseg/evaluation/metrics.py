"""
Segmentation scores: Rand error and split/merge variation of information, with nodes close
to the ground-truth boundary excluded
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import entropy
from sklearn.metrics.cluster import contingency_matrix

from ..data.transforms import distance_transform
from ..engine.grid import Segmentation, boundary_mask
from ..utils.errors import ContractViolation

logger = logging.getLogger(__name__)

METRIC_NAMES = ("arand", "voi_split", "voi_merge")


@dataclass(frozen=True)
class ScoreReport:
    arand: float
    voi_split: float
    voi_merge: float
    scored_nodes: int

    @property
    def voi(self) -> float:
        return self.voi_split + self.voi_merge


@dataclass(frozen=True)
class ScoreAggregate:
    """Per-image reports of one method over a corpus"""
    image_ids: Tuple[str, ...]
    reports: Tuple[ScoreReport, ...]

    def __len__(self) -> int:
        return len(self.reports)

    @property
    def summary(self) -> Dict[str, Tuple[float, float]]:
        return summarize(self.reports)


def _check_pair(pred: Segmentation, gt: Segmentation):
    if pred.graph != gt.graph:
        raise ValueError(f"prediction grid {pred.graph.shape} does not match ground truth {gt.graph.shape}")
    if not (pred.is_complete and gt.is_complete):
        raise ContractViolation("scoring requires complete segmentations")


def tolerance_mask(gt: Segmentation, tolerance: float) -> np.ndarray:
    """Nodes that are scored: distance to the nearest GT boundary node exceeds `tolerance`.

    Tolerance 0 scores every node, boundary nodes included.
    """
    scored = np.ones(gt.graph.n_nodes, dtype=bool)
    if tolerance <= 0:
        return scored
    boundary = boundary_mask(gt)
    if not boundary.any():
        return scored
    return distance_transform(boundary, gt.graph.shape) > tolerance


def contingency(pred: Segmentation, gt: Segmentation, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Joint counts n(i, j) of scored nodes; rows follow sorted pred labels, columns gt labels"""
    mask = np.ones(gt.graph.n_nodes, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != (gt.graph.n_nodes,):
        raise ValueError(f"mask must hold one entry per node, got shape {mask.shape}")
    if not mask.any():
        return np.zeros((0, 0), dtype=np.int64)
    return contingency_matrix(pred.labels[mask], gt.labels[mask]).astype(np.int64)


def _pairs(counts: np.ndarray) -> float:
    counts = counts.astype(np.float64)
    return float(np.sum(counts * (counts - 1.0)) / 2.0)


def _rand_error(table: np.ndarray, adapted: bool) -> float:
    n = int(table.sum())
    together_both = _pairs(table.ravel())
    together_pred = _pairs(table.sum(axis=1))
    together_gt = _pairs(table.sum(axis=0))
    if adapted:
        precision = together_both / together_pred if together_pred else 1.0
        recall = together_both / together_gt if together_gt else 1.0
        if precision + recall == 0:
            return 1.0
        return 1.0 - 2.0 * precision * recall / (precision + recall)
    total = n * (n - 1) / 2.0
    agreements = total - together_pred - together_gt + 2.0 * together_both
    return 1.0 - agreements / total


def _split_merge(table: np.ndarray) -> Tuple[float, float]:
    joint = entropy(table.ravel())
    split = joint - entropy(table.sum(axis=0))
    merge = joint - entropy(table.sum(axis=1))
    return max(0.0, float(split)), max(0.0, float(merge))


def _scored_table(pred: Segmentation, gt: Segmentation, tolerance: float) -> np.ndarray:
    _check_pair(pred, gt)
    table = contingency(pred, gt, tolerance_mask(gt, tolerance))
    if table.sum() < 2:
        raise ValueError(f"fewer than 2 nodes remain after boundary tolerance {tolerance}")
    return table


def arand(pred: Segmentation, gt: Segmentation, tolerance: float = 0.0, adapted: bool = False) -> float:
    """1 - Rand agreement over scored node pairs; `adapted` gives 1 - pair F-score instead"""
    return _rand_error(_scored_table(pred, gt, tolerance), adapted)


def voi(pred: Segmentation, gt: Segmentation, tolerance: float = 0.0) -> Tuple[float, float]:
    """(split, merge) = (H(pred | gt), H(gt | pred)) in nats"""
    return _split_merge(_scored_table(pred, gt, tolerance))


def score(pred: Segmentation, gt: Segmentation, tolerance: float = 0.0,
          adapted: bool = False) -> ScoreReport:
    table = _scored_table(pred, gt, tolerance)
    split, merge = _split_merge(table)
    return ScoreReport(arand=_rand_error(table, adapted), voi_split=split, voi_merge=merge,
                       scored_nodes=int(table.sum()))


def summarize(reports: Sequence[ScoreReport]) -> Dict[str, Tuple[float, float]]:
    """Mean and sample standard deviation of each metric; std is 0 for a single report"""
    if not reports:
        raise ValueError("nothing to summarize")
    frame = pd.DataFrame([[getattr(r, name) for name in METRIC_NAMES] for r in reports],
                         columns=list(METRIC_NAMES))
    means, stds = frame.mean(), frame.std(ddof=1).fillna(0.0)
    return {name: (float(means[name]), float(stds[name])) for name in METRIC_NAMES}
