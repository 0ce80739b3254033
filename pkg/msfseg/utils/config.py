"""
Configuration settings for msfseg
"""
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()


class Config:
    # Logging Configuration
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Worker Configuration
    DEFAULT_WORKERS = int(os.getenv("MSFSEG_WORKERS", 1))
    SHOW_PROGRESS = os.getenv("MSFSEG_PROGRESS", "1") not in ("0", "false", "False", "")

    # Evaluation Configuration
    DEFAULT_TOLERANCE_SYNTHETIC = 2.0

    # File Layout
    MODEL_SUFFIX = ".lwm"
    RESOLVED_CONFIG_NAME = "config.resolved"

    @classmethod
    def validate_config(cls):
        """Validate configuration settings"""
        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"LOG_LEVEL must be a logging level name, got {cls.LOG_LEVEL!r}")
        if cls.DEFAULT_WORKERS < 1:
            raise ValueError("MSFSEG_WORKERS must be a positive integer")
        return True


# Pipeline stages (CLI subcommands)
class StageTypes:
    GENERATE = "generate"
    PRETRAIN_G = "pretrain-g"
    TRAIN = "train"
    SEGMENT = "segment"
    EVALUATE = "evaluate"
    REPORT = "report"

    ALL = (GENERATE, PRETRAIN_G, TRAIN, SEGMENT, EVALUATE, REPORT)


# Model architectures
class ModelKinds:
    BOUNDARY = "boundary"
    STATIC = "static"
    DYNAMIC = "dynamic"


# Structured loss weightings
class WeightModes:
    BINARY = "binary"
    DISCOUNTED = "discounted"


# Segmentation methods compared in reports, in table order
class SegmentMethods:
    LEARNED_DYNAMIC = "learned-dynamic"
    LEARNED_STATIC = "learned-static"
    G_WS = "g+WS"
    G_DTWS = "g+DTWS"
    RAW_WS = "raw+WS"

    ALL = (LEARNED_DYNAMIC, LEARNED_STATIC, G_WS, G_DTWS, RAW_WS)


def _check(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    gamma: float = 0.7
    epochs: int = 10
    workers: int = 1
    rng_seed: int = 0
    weight_mode: str = WeightModes.DISCOUNTED
    model_kind: str = ModelKinds.DYNAMIC
    checkpoint_every: int = 0
    truncation: int = 32

    def __post_init__(self):
        _check(self.learning_rate > 0, "train.learning_rate must be positive")
        _check(0 <= self.momentum < 1, "train.momentum must lie in [0, 1)")
        _check(0 <= self.gamma <= 1, "train.gamma must lie in [0, 1]")
        _check(self.epochs >= 1, "train.epochs must be positive")
        _check(self.workers >= 1, "train.workers must be positive")
        _check(self.weight_mode in (WeightModes.BINARY, WeightModes.DISCOUNTED),
               f"train.weight_mode must be binary or discounted, got {self.weight_mode!r}")
        _check(self.model_kind in (ModelKinds.STATIC, ModelKinds.DYNAMIC),
               f"train.model_kind must be static or dynamic, got {self.model_kind!r}")
        _check(self.checkpoint_every >= 0, "train.checkpoint_every must be non-negative")
        _check(self.truncation >= 1, "train.truncation must be positive")


@dataclass(frozen=True)
class SynthConfig:
    height: int = 64
    width: int = 64
    sigma_noise: float = 0.3
    sigma_process: Optional[float] = None
    sigma_blur: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        _check(self.height >= 8 and self.width >= 8, "synth size must be at least 8x8")
        _check(self.sigma_noise >= 0, "synth.sigma_noise must be non-negative")
        _check(self.sigma_process is None or self.sigma_process > 0,
               "synth.sigma_process must be positive")
        _check(self.sigma_blur >= 0, "synth.sigma_blur must be non-negative")

    @property
    def size(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def effective_sigma_process(self) -> float:
        # 8 px at 252x252, scaled with the image side
        if self.sigma_process is not None:
            return self.sigma_process
        return 8.0 * min(self.height, self.width) / 252.0


@dataclass(frozen=True)
class GenerateConfig:
    count: int = 10

    def __post_init__(self):
        _check(self.count >= 1, "generate.count must be positive")


@dataclass(frozen=True)
class ModelConfig:
    patch_radius: int = 3
    hidden_size: int = 32
    r: int = 16

    def __post_init__(self):
        _check(self.patch_radius >= 0, "model.patch_radius must be non-negative")
        _check(self.hidden_size >= 1, "model.hidden_size must be positive")
        _check(self.r >= 1, "model.r must be positive")


@dataclass(frozen=True)
class GConfig:
    epochs: int = 30
    batch_size: int = 256
    learning_rate: float = 0.05
    momentum: float = 0.9
    samples_per_image: int = 400
    hidden_size: int = 32
    patch_radius: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        _check(self.epochs >= 1, "g.epochs must be positive")
        _check(self.batch_size >= 1, "g.batch_size must be positive")
        _check(self.learning_rate > 0, "g.learning_rate must be positive")
        _check(0 <= self.momentum < 1, "g.momentum must lie in [0, 1)")
        _check(self.samples_per_image >= 2, "g.samples_per_image must be at least 2")
        _check(self.hidden_size >= 1, "g.hidden_size must be positive")
        _check(self.patch_radius >= 0, "g.patch_radius must be non-negative")


@dataclass(frozen=True)
class EvalConfig:
    tolerance: float = Config.DEFAULT_TOLERANCE_SYNTHETIC
    adapted: bool = False
    sigmas: Tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    thresholds: Tuple[float, ...] = (0.3, 0.5, 0.7)

    def __post_init__(self):
        _check(self.tolerance >= 0, "eval.tolerance must be non-negative")
        _check(all(s >= 0 for s in self.sigmas), "eval.sigmas must be non-negative")
        _check(all(0 < t < 1 for t in self.thresholds), "eval.thresholds must lie in (0, 1)")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


def _parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_paths(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _render(value: Any) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_render(item) for item in value)
    return str(value)


# section -> key -> (parser, default)
_SCHEMA: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]] = {
    "synth": {
        "height": (int, SynthConfig.height),
        "width": (int, SynthConfig.width),
        "sigma_noise": (_parse_floats, (SynthConfig.sigma_noise,)),
        "sigma_process": (_parse_optional_float, None),
        "sigma_blur": (float, SynthConfig.sigma_blur),
        "rng_seed": (int, SynthConfig.rng_seed),
    },
    "generate": {
        "count": (int, GenerateConfig.count),
    },
    "model": {
        "patch_radius": (int, ModelConfig.patch_radius),
        "hidden_size": (int, ModelConfig.hidden_size),
        "r": (int, ModelConfig.r),
    },
    "g": {name: (type(getattr(GConfig, name)), getattr(GConfig, name))
          for name in ("epochs", "batch_size", "learning_rate", "momentum",
                       "samples_per_image", "hidden_size", "patch_radius", "rng_seed")},
    "train": {name: (type(getattr(TrainConfig, name)), getattr(TrainConfig, name))
              for name in ("learning_rate", "momentum", "gamma", "epochs", "workers",
                           "rng_seed", "weight_mode", "model_kind", "checkpoint_every",
                           "truncation")},
    "eval": {
        "tolerance": (float, EvalConfig.tolerance),
        "adapted": (_parse_bool, EvalConfig.adapted),
        "sigmas": (_parse_floats, EvalConfig.sigmas),
        "thresholds": (_parse_floats, EvalConfig.thresholds),
    },
    "segment": {
        "method": (str, SegmentMethods.LEARNED_DYNAMIC),
    },
    "paths": {
        "train_corpus": (str, ""),
        "test_corpus": (str, ""),
        "g_model": (str, ""),
        "model": (str, ""),
        "predictions": (str, ""),
        "scores": (_parse_paths, ()),
    },
}


@dataclass
class RunConfig:
    """Resolved `section.key = value` run configuration"""
    values: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    source: Optional[Path] = None

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({section: {key: default for key, (_, default) in keys.items()}
                    for section, keys in _SCHEMA.items()})

    @classmethod
    def from_text(cls, text: str, source: Optional[Path] = None) -> "RunConfig":
        config = cls.defaults()
        config.source = source
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
            name, value = (part.strip() for part in line.split("=", 1))
            if "." not in name:
                raise ConfigError(f"line {lineno}: key {name!r} lacks a section prefix")
            section, key = name.split(".", 1)
            if section not in _SCHEMA or key not in _SCHEMA[section]:
                raise ConfigError(f"line {lineno}: unknown config key {name!r}")
            parser, _ = _SCHEMA[section][key]
            try:
                config.values[section][key] = parser(value)
            except ValueError as e:
                raise ConfigError(f"line {lineno}: bad value for {name}: {str(e)}") from e
        return config

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {str(e)}") from e
        return cls.from_text(text, source=path)

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def resolved_text(self) -> str:
        lines = [f"# resolved from {self.source}" if self.source else "# resolved defaults"]
        for section in _SCHEMA:
            for key in _SCHEMA[section]:
                lines.append(f"{section}.{key} = {_render(self.values[section][key])}")
        return "\n".join(lines) + "\n"

    def write_resolved(self, out_dir: Path) -> Path:
        target = Path(out_dir) / Config.RESOLVED_CONFIG_NAME
        target.write_text(self.resolved_text(), encoding="utf-8", newline="\n")
        return target

    def _build(self, cls, section: str, **overrides):
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in self.values[section].items() if k in names}
        kwargs.update(overrides)
        return cls(**kwargs)

    def train_config(self) -> TrainConfig:
        return self._build(TrainConfig, "train")

    def generate_config(self) -> GenerateConfig:
        return self._build(GenerateConfig, "generate")

    def model_config(self) -> ModelConfig:
        return self._build(ModelConfig, "model")

    def g_config(self) -> GConfig:
        return self._build(GConfig, "g")

    def eval_config(self) -> EvalConfig:
        return self._build(EvalConfig, "eval")

    def synth_configs(self) -> List[SynthConfig]:
        """One SynthConfig per configured noise level"""
        section = dict(self.values["synth"])
        noises = section.pop("sigma_noise")
        if not noises:
            raise ConfigError("synth.sigma_noise needs at least one value")
        return [SynthConfig(sigma_noise=noise, **section) for noise in noises]
