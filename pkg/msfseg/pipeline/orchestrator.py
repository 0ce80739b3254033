"""
Experiment Orchestrator - runs the pipeline stages behind the msf-seg commands
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..data.corpus import CorpusStore, Sample, stream_corpus
from ..evaluation.baselines import (BASELINE_METHODS, LEARNED_METHODS,
                                    segment_baseline, segment_learned, select_baseline_settings)
from ..evaluation.metrics import score
from ..evaluation.report import score_frame, write_report, write_scores
from ..models.boundary import augment, train_g
from ..models.params import ModelParams, init_params, load_model, save_model
from ..training.trainer import StructuredTrainer, evaluate
from ..utils.array_store import read_header
from ..utils.config import Config, ModelKinds, RunConfig, SegmentMethods, StageTypes
from ..utils.errors import ConfigError, TrainingDivergedError

logger = logging.getLogger(__name__)

PREDICTIONS_INDEX = "predictions.csv"
SETTINGS_NAME = "baseline_settings.csv"


class ExperimentOrchestrator:
    def __init__(self, run_config: RunConfig, out_dir: Optional[Path] = None):
        self.run_config = run_config
        self.out_dir = Path(out_dir) if out_dir else None
        self._stages: Dict[str, Callable[[Path], List[Path]]] = {
            StageTypes.GENERATE: self.generate,
            StageTypes.PRETRAIN_G: self.pretrain_g,
            StageTypes.TRAIN: self.train,
            StageTypes.SEGMENT: self.segment,
            StageTypes.EVALUATE: self.evaluate,
            StageTypes.REPORT: self.report,
        }

    def handle_command(self, stage: str) -> List[Path]:
        """Write the resolved config into the output directory, then run one stage and validate its outputs"""
        if stage not in self._stages:
            raise ValueError(f"unknown command {stage!r}; expected one of {', '.join(StageTypes.ALL)}")
        out_dir = self.out_dir or Path("runs") / stage
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            resolved = self.run_config.write_resolved(out_dir)
            logger.info(f"Running {stage} into {out_dir}")
            outputs = self._stages[stage](out_dir)
            outputs.append(resolved)
            self._validate_outputs(outputs)
            logger.info(f"{stage} finished: {len(outputs)} files written")
            return outputs
        except Exception as e:
            logger.error(f"Error running {stage}: {str(e)}")
            raise

    def _path(self, key: str, required: bool = True) -> Optional[Path]:
        value = self.run_config.get("paths", key)
        if not value:
            if required:
                raise ConfigError(f"paths.{key} must be set for this command")
            return None
        return Path(value)

    def _load_g(self, required: bool = True) -> Optional[ModelParams]:
        path = self._path("g_model", required)
        if path is None:
            return None
        if not path.exists():
            raise FileNotFoundError(f"pretrained g model not found at {path}; run pretrain-g first")
        g_params = load_model(path)
        g_params.expect(ModelKinds.BOUNDARY)
        return g_params

    @staticmethod
    def _validate_outputs(outputs: Sequence[Path]):
        for path in outputs:
            if not Path(path).exists():
                raise FileNotFoundError(f"declared output {path} was not written")
            if path.suffix == ".lwa1":
                read_header(path)
            elif path.suffix == Config.MODEL_SUFFIX:
                load_model(path)

    def generate(self, out_dir: Path) -> List[Path]:
        samples = stream_corpus(self.run_config.synth_configs(),
                                self.run_config.generate_config().count,
                                workers=Config.DEFAULT_WORKERS)
        return CorpusStore(out_dir).write(samples)

    def pretrain_g(self, out_dir: Path) -> List[Path]:
        corpus = CorpusStore(self._path("train_corpus")).read()
        g_params, losses = train_g([(s.image, s.gt) for s in corpus], self.run_config.g_config())
        model_path = save_model(out_dir / f"g{Config.MODEL_SUFFIX}", g_params)
        loss_path = out_dir / "g_loss.csv"
        pd.DataFrame({"epoch": np.arange(1, len(losses) + 1), "loss": losses}).to_csv(
            loss_path, index=False, lineterminator="\n")
        return [model_path, loss_path]

    @staticmethod
    def _augmented(corpus: Sequence[Sample], g_params: ModelParams) -> List[Sample]:
        return [Sample(s.sample_id, augment(s.image, g_params), s.gt, s.seeds, s.sigma_noise, s.rng_seed)
                for s in corpus]

    def train(self, out_dir: Path) -> List[Path]:
        g_params = self._load_g()
        corpus = self._augmented(CorpusStore(self._path("train_corpus")).read(), g_params)
        train_config = self.run_config.train_config()
        model_config = self.run_config.model_config()
        params = init_params(train_config.model_kind, corpus[0].image.channels,
                             model_config.patch_radius, model_config.hidden_size, model_config.r,
                             rng=np.random.default_rng(train_config.rng_seed))
        trainer = StructuredTrainer(train_config, params, checkpoint_dir=out_dir / "checkpoints")
        trace_path = out_dir / "trace.csv"
        try:
            params, _ = trainer.fit(corpus)
        except TrainingDivergedError:
            trainer.write_trace(trace_path)
            checkpoint = trainer.save_checkpoint()
            logger.error(f"Training diverged; last finite parameters (step {trainer.step}) saved to "
                         f"{checkpoint}, trace kept in {trace_path}")
            raise
        outputs = [save_model(out_dir / f"model{Config.MODEL_SUFFIX}", params),
                   trainer.write_trace(trace_path)]
        if trainer.checkpoint_dir.exists():
            outputs.extend(sorted(trainer.checkpoint_dir.glob(f"*{Config.MODEL_SUFFIX}")))

        tolerance = self.run_config.eval_config().tolerance
        summary = evaluate(params, corpus, train_config.model_kind, tolerance).summary
        mean, std = summary["arand"]
        logger.info(f"Training-set ARAND after training: {mean:.4f} ± {std:.4f}")
        return outputs

    def segment(self, out_dir: Path) -> List[Path]:
        method = self.run_config.get("segment", "method")
        test_store = CorpusStore(self._path("test_corpus"))
        corpus = test_store.read()
        predictions = CorpusStore(out_dir)
        outputs: List[Path] = []

        if method in LEARNED_METHODS:
            g_params = self._load_g()
            model_path = self._path("model")
            if not model_path.exists():
                raise FileNotFoundError(f"trained model not found at {model_path}")
            params = load_model(model_path)
            params.expect(LEARNED_METHODS[method])

            def run(sample: Sample):
                return segment_learned(params, sample.image, sample.seeds, g_params)
        elif method in BASELINE_METHODS:
            g_params = self._load_g(required=method != SegmentMethods.RAW_WS)
            train_corpus = CorpusStore(self._path("train_corpus")).read()
            settings = select_baseline_settings(method, train_corpus, self.run_config.eval_config(),
                                                g_params)
            settings_path = out_dir / SETTINGS_NAME
            pd.DataFrame([{"method": method, "sigma": settings.sigma,
                           "threshold": "" if settings.threshold is None else settings.threshold}]).to_csv(
                settings_path, index=False, lineterminator="\n")
            outputs.append(settings_path)

            def run(sample: Sample):
                return segment_baseline(method, sample.image, sample.seeds, settings, g_params)
        else:
            raise ConfigError(f"unknown segment.method {method!r}; expected one of "
                              f"{', '.join(SegmentMethods.ALL)}")

        rows = []
        for sample in corpus:
            outputs.append(predictions.save_prediction(sample.sample_id, run(sample)))
            rows.append([sample.sample_id, method, sample.sigma_noise])
        index_path = out_dir / PREDICTIONS_INDEX
        pd.DataFrame(rows, columns=["id", "method", "sigma_noise"]).to_csv(
            index_path, index=False, lineterminator="\n")
        outputs.append(index_path)
        logger.info(f"Segmented {len(corpus)} images with {method}")
        return outputs

    def evaluate(self, out_dir: Path) -> List[Path]:
        eval_config = self.run_config.eval_config()
        corpus = {s.sample_id: s for s in CorpusStore(self._path("test_corpus")).read()}
        predictions = CorpusStore(self._path("predictions"))
        index_path = predictions.root / PREDICTIONS_INDEX
        if not index_path.exists():
            raise FileNotFoundError(f"no prediction index at {index_path}; run segment first")
        index = pd.read_csv(index_path, dtype={"id": str, "method": str})

        rows = []
        for entry in index.itertuples(index=False):
            if entry.id not in corpus:
                raise ValueError(f"prediction {entry.id} has no ground truth in the test corpus")
            sample = corpus[entry.id]
            read_header(predictions.prediction_path(entry.id))
            report = score(predictions.load_prediction(entry.id), sample.gt, eval_config.tolerance,
                           eval_config.adapted)
            rows.append((entry.id, entry.method, float(entry.sigma_noise), sample.gt.graph.shape,
                         report, eval_config.tolerance))
        return [write_scores(out_dir / "scores.csv", score_frame(rows))]

    def report(self, out_dir: Path) -> List[Path]:
        score_paths = self.run_config.get("paths", "scores")
        if not score_paths:
            raise ConfigError("paths.scores must list at least one score CSV")
        return write_report(out_dir, score_paths)
