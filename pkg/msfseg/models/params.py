"""
Flat parameter vectors with named block layouts, initialization and model files
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..engine.grid import N_DIRECTIONS
from ..utils.array_store import decode_array, encode_array
from ..utils.config import ModelKinds
from ..utils.errors import ArrayFormatError

logger = logging.getLogger(__name__)

MODEL_MAGIC = "MSFSEG-MODEL 1"
N_PROJECTION = 3

Shape = Tuple[int, ...]


def window_size(patch_radius: int) -> int:
    return (2 * patch_radius + 1) ** 2


def architecture_layout(architecture: str, channels: int, patch_radius: int,
                        hidden_size: int, r: int) -> List[Tuple[str, Shape]]:
    """Ordered (block name, shape) list for an architecture"""
    k = window_size(patch_radius)
    h = hidden_size
    if architecture == ModelKinds.BOUNDARY:
        return [("hidden_w", (h, k * channels)), ("hidden_b", (h,)),
                ("readout_w", (h,)), ("readout_b", (1,))]
    if architecture == ModelKinds.STATIC:
        return [("hidden_w", (h, k * channels + N_DIRECTIONS)), ("hidden_b", (h,)),
                ("readout_w", (h,)), ("readout_b", (1,))]
    if architecture == ModelKinds.DYNAMIC:
        layout = [("hidden_w", (h, k * channels + N_DIRECTIONS)),
                  ("proj_w", (h, N_PROJECTION * k)), ("hidden_b", (h,))]
        for gate in ("update", "reset", "cand"):
            layout += [(f"{gate}_w", (r, h)), (f"{gate}_u", (r, r)), (f"{gate}_b", (r,))]
        layout += [("readout_w", (r,)), ("readout_b", (1,))]
        return layout
    raise ValueError(f"unknown architecture {architecture!r}")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Parameter vector theta plus the layout that slices it into blocks"""
    architecture: str
    channels: int
    patch_radius: int
    hidden_size: int
    r: int
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64).reshape(-1)
        if theta.size != self.size:
            raise ValueError(f"theta has {theta.size} entries, layout needs {self.size}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("parameters must be finite")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def layout(self) -> List[Tuple[str, Shape]]:
        return architecture_layout(self.architecture, self.channels, self.patch_radius,
                                   self.hidden_size, self.r)

    @property
    def size(self) -> int:
        return sum(int(np.prod(shape)) for _, shape in self.layout)

    @property
    def slices(self) -> Dict[str, Tuple[slice, Shape]]:
        out, start = {}, 0
        for name, shape in self.layout:
            stop = start + int(np.prod(shape))
            out[name] = (slice(start, stop), shape)
            start = stop
        return out

    def blocks(self, vector: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
        """Reshaped views of `vector` (default theta), keyed by block name"""
        vector = self.theta if vector is None else vector
        return {name: vector[sl].reshape(shape) for name, (sl, shape) in self.slices.items()}

    def with_theta(self, theta: np.ndarray) -> "ModelParams":
        return replace(self, theta=theta)

    def expect(self, architecture: str):
        if self.architecture != architecture:
            raise ValueError(f"expected {architecture} parameters, got {self.architecture}")


def init_params(architecture: str, channels: int, patch_radius: int, hidden_size: int,
                r: int = 0, rng: Optional[np.random.Generator] = None) -> ModelParams:
    """Uniform +-sqrt(6 / (fan_in + fan_out)) weights per block, zero biases"""
    rng = rng if rng is not None else np.random.default_rng(0)
    if architecture != ModelKinds.DYNAMIC:
        r = 0
    pieces = []
    for name, shape in architecture_layout(architecture, channels, patch_radius, hidden_size, r):
        if name.endswith("_b"):
            pieces.append(np.zeros(int(np.prod(shape))))
            continue
        fan_out, fan_in = (shape[0], shape[1]) if len(shape) == 2 else (1, shape[0])
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        pieces.append(rng.uniform(-limit, limit, size=int(np.prod(shape))))
    return ModelParams(architecture, channels, patch_radius, hidden_size, r,
                       np.concatenate(pieces))


def encode_model(params: ModelParams) -> bytes:
    blocks = ",".join(f"{name}:{'x'.join(str(d) for d in shape)}" for name, shape in params.layout)
    header = "\n".join([
        MODEL_MAGIC,
        f"architecture={params.architecture}",
        f"patch_radius={params.patch_radius}",
        f"hidden_size={params.hidden_size}",
        f"r={params.r}",
        f"channels={params.channels}",
        f"blocks={blocks}",
        "",
        "",
    ])
    payload = encode_array(params.theta.astype(np.float32).reshape(1, -1, 1))
    return header.encode("ascii") + payload


def decode_model(data: bytes) -> ModelParams:
    split = data.find(b"\n\n")
    if split < 0:
        raise ArrayFormatError("model file lacks a header terminator")
    lines = data[:split].decode("ascii").split("\n")
    if lines[0] != MODEL_MAGIC:
        raise ArrayFormatError(f"bad model magic {lines[0]!r}")
    fields = dict(line.split("=", 1) for line in lines[1:])
    try:
        params_shape = dict(architecture=fields["architecture"],
                            channels=int(fields["channels"]),
                            patch_radius=int(fields["patch_radius"]),
                            hidden_size=int(fields["hidden_size"]),
                            r=int(fields["r"]))
    except (KeyError, ValueError) as e:
        raise ArrayFormatError(f"incomplete model header: {str(e)}") from e
    theta = decode_array(data[split + 2:]).reshape(-1).astype(np.float64)
    try:
        params = ModelParams(theta=theta, **params_shape)
    except ValueError as e:
        raise ArrayFormatError(f"model payload does not match its header: {str(e)}") from e
    expected = ",".join(f"{name}:{'x'.join(str(d) for d in shape)}" for name, shape in params.layout)
    if fields.get("blocks") != expected:
        raise ArrayFormatError("model block layout does not match its architecture")
    return params


def save_model(path: Union[str, Path], params: ModelParams) -> Path:
    path = Path(path)
    path.write_bytes(encode_model(params))
    logger.info(f"Saved {params.architecture} model ({params.size} parameters) to {path}")
    return path


def load_model(path: Union[str, Path]) -> ModelParams:
    return decode_model(Path(path).read_bytes())
