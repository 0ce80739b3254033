"""
Structured trainer - free and constrained growth, error analysis and momentum SGD over a corpus
"""
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from ..engine.grid import Image, SeedSet, Segmentation, cut_set
from ..engine.msf import grow, segmentation_of
from ..engine.structured_loss import analyze, false_cut_equality_rate, perceptron_loss, structured_loss
from ..evaluation.metrics import ScoreAggregate, arand, score
from ..models.altitude import make_provider, objective_and_gradient
from ..models.params import ModelParams, init_params, save_model
from ..utils.config import Config, ModelConfig, TrainConfig
from ..utils.errors import TrainingDivergedError

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["step", "epoch", "image_id", "loss", "perceptron_loss", "incorrect_count",
                 "gradient_norm", "arand"]

Instance = Tuple[str, Image, Segmentation, SeedSet]


@dataclass(frozen=True)
class EpochStats:
    loss: float
    perceptron_loss: float
    incorrect_count: int
    arand: float
    gradient_norm: float


@dataclass(frozen=True)
class TraceRow:
    step: int
    epoch: int
    image_id: str
    stats: EpochStats

    def as_list(self) -> list:
        s = self.stats
        return [self.step, self.epoch, self.image_id, s.loss, s.perceptron_loss, s.incorrect_count,
                s.gradient_norm, s.arand]


def check_seeds(gt: Segmentation, seeds: SeedSet):
    """One seed per GT region, each carrying its region's label"""
    regions = np.unique(gt.labels)
    if len(seeds) != regions.size:
        raise ValueError(f"{len(seeds)} seeds for {regions.size} ground-truth regions")
    for node, label in seeds.seeds:
        if not 0 <= node < gt.graph.n_nodes:
            raise IndexError(f"seed node {node} out of range")
        if gt.labels[node] != label:
            raise ValueError(f"seed at node {node} has label {label} but lies in region {gt.labels[node]}")


def _as_instance(item, index: int) -> Instance:
    if hasattr(item, "sample_id"):
        return item.sample_id, item.image, item.gt, item.seeds
    image, gt, seeds = item
    return f"{index:04d}", image, gt, seeds


def epoch_step(params: ModelParams, image: Image, gt: Segmentation, seeds: SeedSet,
               config: Optional[TrainConfig] = None) -> Tuple[np.ndarray, EpochStats]:
    """Gradient of the structured loss on one instance; `params` is not modified"""
    config = config or TrainConfig(model_kind=params.architecture)
    if image.graph != gt.graph:
        raise ValueError(f"image grid {image.graph.shape} does not match ground truth {gt.graph.shape}")
    check_seeds(gt, seeds)

    provider = make_provider(params)
    free = grow(image.graph, image, seeds, provider)
    constrained = grow(image.graph, image, seeds, provider, forbidden=cut_set(gt))
    analysis = analyze(free, constrained, config.weight_mode, config.gamma)
    false_cut_equality_rate(analysis, constrained)

    _, grad = objective_and_gradient(params, analysis.weights, free, constrained, image,
                                     truncation=config.truncation)
    stats = EpochStats(loss=structured_loss(analysis.weights, free, constrained),
                       perceptron_loss=perceptron_loss(free, constrained),
                       incorrect_count=len(analysis.incorrect_nodes),
                       arand=arand(segmentation_of(free), gt),
                       gradient_norm=float(np.linalg.norm(grad)))
    return grad, stats


class StructuredTrainer:
    """Momentum SGD on the structured loss.

    With one worker the run is a deterministic function of (corpus, config). With more,
    workers compute gradients on parameter snapshots and updates are applied in arrival
    order under a lock.
    """

    def __init__(self, config: TrainConfig, params: ModelParams,
                 checkpoint_dir: Optional[Union[str, Path]] = None):
        if params.architecture != config.model_kind:
            raise ValueError(f"train.model_kind is {config.model_kind} but parameters are {params.architecture}")
        self.config = config
        self.params = params
        self.velocity = np.zeros(params.size)
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.step = 0
        self.trace: List[TraceRow] = []
        self._lock = threading.Lock()
        self._rng = np.random.default_rng(config.rng_seed)

    def snapshot(self) -> ModelParams:
        with self._lock:
            return self.params

    def apply(self, grad: np.ndarray, stats: EpochStats, image_id: str, epoch: int):
        with self._lock:
            if not np.all(np.isfinite(grad)) or not np.isfinite(stats.loss):
                raise TrainingDivergedError(self.step + 1, image_id,
                                            f"gradient norm {stats.gradient_norm}, loss {stats.loss}")
            self.velocity = self.config.momentum * self.velocity - self.config.learning_rate * grad
            self.params = self.params.with_theta(self.params.theta + self.velocity)
            self.step += 1
            self.trace.append(TraceRow(self.step, epoch, image_id, stats))
            logger.debug(f"step {self.step} ({image_id}): loss {stats.loss:.6g}, "
                         f"{stats.incorrect_count} incorrect, |g| {stats.gradient_norm:.4g}")
            if self.checkpoint_dir and self.config.checkpoint_every \
                    and self.step % self.config.checkpoint_every == 0:
                self.save_checkpoint()

    def save_checkpoint(self) -> Path:
        self.checkpoint_dir.mkdir(parents=True, exist_ok=True)
        return save_model(self.checkpoint_dir / f"step_{self.step:06d}{Config.MODEL_SUFFIX}", self.params)

    def _run_sequential(self, instances: Sequence[Instance], epoch: int):
        order = self._rng.permutation(len(instances))
        for index in tqdm(order, desc=f"epoch {epoch}", disable=not Config.SHOW_PROGRESS, leave=False):
            image_id, image, gt, seeds = instances[index]
            grad, stats = epoch_step(self.params, image, gt, seeds, self.config)
            self.apply(grad, stats, image_id, epoch)

    def _run_async(self, instances: Sequence[Instance], epoch: int):
        draws = self._rng.integers(len(instances), size=len(instances))

        def work(index: int):
            image_id, image, gt, seeds = instances[index]
            grad, stats = epoch_step(self.snapshot(), image, gt, seeds, self.config)
            return image_id, grad, stats

        results = Parallel(n_jobs=self.config.workers, backend="threading",
                           return_as="generator_unordered")(delayed(work)(int(i)) for i in draws)
        for image_id, grad, stats in tqdm(results, total=len(draws), desc=f"epoch {epoch}",
                                          disable=not Config.SHOW_PROGRESS, leave=False):
            self.apply(grad, stats, image_id, epoch)

    def fit(self, corpus: Sequence) -> Tuple[ModelParams, List[EpochStats]]:
        if not corpus:
            raise ValueError("cannot train on an empty corpus")
        instances = [_as_instance(item, i) for i, item in enumerate(corpus)]
        logger.info(f"Structured training of a {self.config.model_kind} model on {len(instances)} "
                    f"instances, {self.config.epochs} epochs, {self.config.workers} worker(s)")

        for epoch in range(1, self.config.epochs + 1):
            first = len(self.trace)
            if self.config.workers == 1:
                self._run_sequential(instances, epoch)
            else:
                self._run_async(instances, epoch)
            epoch_rows = [row.stats for row in self.trace[first:]]
            mean_loss = float(np.mean([s.loss for s in epoch_rows]))
            incorrect = sum(s.incorrect_count for s in epoch_rows)
            below = sum(s.loss < s.perceptron_loss for s in epoch_rows)
            logger.info(f"Epoch {epoch}: mean loss {mean_loss:.6g}, {incorrect} incorrect nodes, "
                        f"mean ARAND {np.mean([s.arand for s in epoch_rows]):.4f}, structured loss below "
                        f"the perceptron loss on {below}/{len(epoch_rows)} steps")
            if incorrect == 0:
                logger.info(f"Every instance is separated after epoch {epoch}; stopping early")
                break
        return self.params, [row.stats for row in self.trace]

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.as_list() for row in self.trace], columns=TRACE_COLUMNS)

    def write_trace(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.trace_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def fit(corpus: Sequence, config: TrainConfig, model_config: Optional[ModelConfig] = None,
        params: Optional[ModelParams] = None) -> Tuple[ModelParams, List[EpochStats]]:
    """Train from `params`, or from a fresh initialization sized to the corpus images"""
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    if params is None:
        model_config = model_config or ModelConfig()
        channels = _as_instance(corpus[0], 0)[1].channels
        params = init_params(config.model_kind, channels, model_config.patch_radius,
                             model_config.hidden_size, model_config.r,
                             rng=np.random.default_rng(config.rng_seed))
    return StructuredTrainer(config, params).fit(corpus)


def evaluate(params: ModelParams, corpus: Sequence, provider_kind: str, tolerance: float,
             adapted: bool = False) -> ScoreAggregate:
    """Grow every instance with the model and score it against its ground truth"""
    params.expect(provider_kind)
    provider = make_provider(params)
    ids, reports = [], []
    for index, item in enumerate(corpus):
        image_id, image, gt, seeds = _as_instance(item, index)
        prediction = segmentation_of(grow(image.graph, image, seeds, provider))
        ids.append(image_id)
        reports.append(score(prediction, gt, tolerance, adapted))
    return ScoreAggregate(tuple(ids), tuple(reports))
