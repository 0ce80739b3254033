"""
Corpus store - synthetic samples and predicted label maps in the on-disk corpus layout
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..engine.grid import GridGraph, Image, SeedSet, Segmentation
from ..utils.array_store import DTYPE_UINT32, load_array, read_header, save_array
from ..utils.config import SynthConfig
from ..utils.errors import ArrayFormatError
from .synth import derive_seeds, generate
from .transforms import seed_oracle

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ["id", "sigma_noise", "rng_seed"]
SEED_COLUMNS = ["label", "row", "col"]


@dataclass(frozen=True)
class Sample:
    sample_id: str
    image: Image
    gt: Segmentation
    seeds: SeedSet
    sigma_noise: float = 0.0
    rng_seed: int = 0


def make_sample(sample_id: str, config: SynthConfig) -> Sample:
    """Generate one instance and place oracle seeds on its ground truth"""
    image, gt = generate(config)
    return Sample(sample_id, image, gt, seed_oracle(gt), config.sigma_noise, config.rng_seed)


def stream_corpus(configs: Sequence[SynthConfig], count: int, workers: int = 1) -> Iterator[Sample]:
    """`count` samples per noise level, yielded lazily in id order.

    Sample RNG seeds are spawned from the first config's run seed.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if not configs:
        raise ValueError("at least one synthesis config is required")
    jobs = []
    seeds = derive_seeds(configs[0].rng_seed, count * len(configs))
    for level, config in enumerate(configs):
        for index in range(count):
            position = level * count + index
            sample_config = SynthConfig(height=config.height, width=config.width,
                                        sigma_noise=config.sigma_noise,
                                        sigma_process=config.sigma_process,
                                        sigma_blur=config.sigma_blur, rng_seed=seeds[position])
            jobs.append((f"{position:04d}", sample_config))
    logger.info(f"Generating {len(jobs)} samples with {workers} worker(s)")
    return Parallel(n_jobs=workers, return_as="generator")(
        delayed(make_sample)(sample_id, config) for sample_id, config in jobs)


def generate_corpus(configs: Sequence[SynthConfig], count: int, workers: int = 1) -> List[Sample]:
    return list(stream_corpus(configs, count, workers))


class CorpusStore:
    """A corpus directory: NNNN_image.lwa1, NNNN_gt.lwa1, NNNN_seeds.csv and manifest.csv"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def image_path(self, sample_id: str) -> Path:
        return self.root / f"{sample_id}_image.lwa1"

    def gt_path(self, sample_id: str) -> Path:
        return self.root / f"{sample_id}_gt.lwa1"

    def seeds_path(self, sample_id: str) -> Path:
        return self.root / f"{sample_id}_seeds.csv"

    def prediction_path(self, sample_id: str) -> Path:
        return self.root / f"{sample_id}_pred.lwa1"

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_NAME

    def write(self, samples: Iterable[Sample]) -> List[Path]:
        """Write each sample as it arrives, then the manifest; returns the written paths"""
        self.root.mkdir(parents=True, exist_ok=True)
        written, rows = [], []
        for sample in samples:
            written.extend(self.write_sample(sample))
            rows.append([sample.sample_id, sample.sigma_noise, sample.rng_seed])
        pd.DataFrame(rows, columns=MANIFEST_COLUMNS).to_csv(self.manifest_path, index=False,
                                                            lineterminator="\n")
        written.append(self.manifest_path)
        logger.info(f"Wrote {len(rows)} samples to {self.root}")
        return written

    def write_sample(self, sample: Sample) -> List[Path]:
        try:
            width = sample.gt.graph.width
            rows = [[label, node // width, node % width] for node, label in sorted(
                sample.seeds.seeds, key=lambda pair: pair[1])]
            pd.DataFrame(rows, columns=SEED_COLUMNS).to_csv(
                self.seeds_path(sample.sample_id), index=False, lineterminator="\n")
            return [
                save_array(self.image_path(sample.sample_id), sample.image.as_array().astype(np.float32)),
                save_array(self.gt_path(sample.sample_id), sample.gt.as_array().astype(np.uint32)),
                self.seeds_path(sample.sample_id),
            ]
        except Exception as e:
            logger.error(f"Error writing sample {sample.sample_id}: {str(e)}")
            raise

    def read_manifest(self) -> pd.DataFrame:
        if not self.manifest_path.exists():
            raise FileNotFoundError(f"no corpus manifest at {self.manifest_path}")
        manifest = pd.read_csv(self.manifest_path, dtype={"id": str})
        missing = set(MANIFEST_COLUMNS) - set(manifest.columns)
        if missing:
            raise ValueError(f"{self.manifest_path}: missing columns {sorted(missing)}")
        return manifest

    def read(self) -> List[Sample]:
        """Load every sample listed in the manifest, in manifest order"""
        manifest = self.read_manifest()
        samples = [self.read_sample(row.id, float(row.sigma_noise), int(row.rng_seed))
                   for row in manifest.itertuples(index=False)]
        if not samples:
            raise ValueError(f"corpus {self.root} is empty")
        logger.info(f"Loaded {len(samples)} samples from {self.root}")
        return samples

    def read_sample(self, sample_id: str, sigma_noise: float = 0.0, rng_seed: int = 0) -> Sample:
        image = Image.from_array(load_array(self.image_path(sample_id)))
        if read_header(self.gt_path(sample_id))[0] != DTYPE_UINT32:
            raise ArrayFormatError(f"{self.gt_path(sample_id)}: label maps must be uint32")
        gt = Segmentation.from_array(load_array(self.gt_path(sample_id)).astype(np.int64))
        if gt.graph != image.graph:
            raise ArrayFormatError(f"sample {sample_id}: image and ground truth shapes differ")
        seeds = self._read_seeds(sample_id, gt.graph)
        return Sample(sample_id, image, gt, seeds, sigma_noise, rng_seed)

    def _read_seeds(self, sample_id: str, graph: GridGraph) -> SeedSet:
        table = pd.read_csv(self.seeds_path(sample_id))
        if list(table.columns) != SEED_COLUMNS:
            raise ValueError(f"{self.seeds_path(sample_id)}: expected columns {SEED_COLUMNS}")
        table = table.sort_values("label")
        if ((table["row"] < 0) | (table["row"] >= graph.height)
                | (table["col"] < 0) | (table["col"] >= graph.width)).any():
            raise IndexError(f"{self.seeds_path(sample_id)}: seed outside the {graph.shape} grid")
        return SeedSet(tuple((int(row) * graph.width + int(col), int(label))
                             for label, row, col in table.itertuples(index=False)))

    def save_prediction(self, sample_id: str, prediction: Segmentation) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        return save_array(self.prediction_path(sample_id), prediction.as_array().astype(np.uint32))

    def load_prediction(self, sample_id: str) -> Segmentation:
        path = self.prediction_path(sample_id)
        if not path.exists():
            raise FileNotFoundError(f"no prediction for sample {sample_id} at {path}")
        return Segmentation.from_array(load_array(path).astype(np.int64))
