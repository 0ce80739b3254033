"""
Structured altitude models - a static patch perceptron and a dynamic model that adds the
relative assignment projection and a gated recurrent history - with analytic gradients of
the structured loss, backpropagated along the growth forest.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

import numpy as np
from scipy.special import expit

from ..engine.grid import DOWN, LEFT, N_DIRECTIONS, RIGHT, UP, Image
from ..engine.msf import AltitudeProvider, GrowthRecord, path_to_seed
from ..utils.config import ModelKinds
from ..utils.errors import ContractViolation
from .features import all_patches, extract_patch, graph_windows, projection_patch
from .params import ModelParams

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 32

_EMPTY = np.zeros(0)
_EMPTY.setflags(write=False)
_DIRECTION_CODES = np.eye(N_DIRECTIONS)


def _direction(width: int, u: int, v: int) -> int:
    delta = v - u
    if delta == 1:
        return RIGHT
    if delta == -1:
        return LEFT
    if delta == width:
        return DOWN
    if delta == -width:
        return UP
    raise ValueError(f"nodes {u} and {v} are not adjacent")


def _check_image(params: ModelParams, image: Image):
    if params.channels != image.channels:
        raise ValueError(f"model expects {params.channels} channels, image has {image.channels}")


def _static_input(image: Image, v: int, direction: int, radius: int) -> np.ndarray:
    return np.concatenate([extract_patch(image, v, radius), _DIRECTION_CODES[direction]])


def static_altitude_table(params: ModelParams, image: Image) -> np.ndarray:
    """(|V|, 4) static altitudes for every target node and step direction"""
    params.expect(ModelKinds.STATIC)
    _check_image(params, image)
    b = params.blocks()
    split = b["hidden_w"].shape[1] - N_DIRECTIONS
    pre = all_patches(image, params.patch_radius) @ b["hidden_w"][:, :split].T + b["hidden_b"]
    pre = pre[:, None, :] + b["hidden_w"][:, split:].T[None, :, :]
    return np.tanh(pre) @ b["readout_w"] + b["readout_b"][0]


def predict_static(params: ModelParams, image: Image, edge: int, u: int, v: int,
                   assignment=None, hidden=None) -> Tuple[float, np.ndarray]:
    """Static altitude of edge u -> v; assignment and hidden are ignored"""
    params.expect(ModelKinds.STATIC)
    _check_image(params, image)
    b = params.blocks()
    x = _static_input(image, v, _direction(image.graph.width, u, v), params.patch_radius)
    hidden_layer = np.tanh(b["hidden_w"] @ x + b["hidden_b"])
    return float(b["readout_w"] @ hidden_layer + b["readout_b"][0]), _EMPTY


@dataclass
class _CellCache:
    x: np.ndarray
    h: np.ndarray
    z: np.ndarray
    r: np.ndarray
    c: np.ndarray
    uh: np.ndarray


def gru_forward(b: Mapping[str, np.ndarray], x: np.ndarray,
                h: np.ndarray) -> Tuple[np.ndarray, _CellCache]:
    """Two-gate recurrent update; the result stays in (-1, 1) when h does"""
    z = expit(b["update_w"] @ x + b["update_u"] @ h + b["update_b"])
    r = expit(b["reset_w"] @ x + b["reset_u"] @ h + b["reset_b"])
    uh = b["cand_u"] @ h
    c = np.tanh(b["cand_w"] @ x + r * uh + b["cand_b"])
    return z * h + (1.0 - z) * c, _CellCache(x, h, z, r, c, uh)


def gru_backward(b: Mapping[str, np.ndarray], grads: Dict[str, np.ndarray], cache: _CellCache,
                 dh_next: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Accumulate cell parameter gradients; return (d input, d previous hidden)"""
    z, r, c, h, x = cache.z, cache.r, cache.c, cache.h, cache.x
    dh_prev = dh_next * z
    dz_pre = dh_next * (h - c) * z * (1.0 - z)
    dc_pre = dh_next * (1.0 - z) * (1.0 - c ** 2)
    d_uh = dc_pre * r
    dr_pre = dc_pre * cache.uh * r * (1.0 - r)

    grads["cand_w"] += np.outer(dc_pre, x)
    grads["cand_u"] += np.outer(d_uh, h)
    grads["cand_b"] += dc_pre
    grads["reset_w"] += np.outer(dr_pre, x)
    grads["reset_u"] += np.outer(dr_pre, h)
    grads["reset_b"] += dr_pre
    grads["update_w"] += np.outer(dz_pre, x)
    grads["update_u"] += np.outer(dz_pre, h)
    grads["update_b"] += dz_pre

    dh_prev += b["cand_u"].T @ d_uh + b["reset_u"].T @ dr_pre + b["update_u"].T @ dz_pre
    dx = b["cand_w"].T @ dc_pre + b["reset_w"].T @ dr_pre + b["update_w"].T @ dz_pre
    return dx, dh_prev


class StaticAltitudeModel(AltitudeProvider):
    """f_static: patch at the target node plus the step direction"""

    def __init__(self, params: ModelParams):
        params.expect(ModelKinds.STATIC)
        self.params = params

    def bind(self, image: Image) -> AltitudeProvider:
        return _BoundStatic(static_altitude_table(self.params, image), image.graph.width)

    def evaluate(self, edge, u, v, assignment, hidden):
        raise ContractViolation("bind the static model to an image before evaluating")


class _BoundStatic(AltitudeProvider):
    def __init__(self, table: np.ndarray, width: int):
        self.table = table
        self.width = width

    def evaluate(self, edge, u, v, assignment, hidden):
        return float(self.table[v, _direction(self.width, u, v)]), _EMPTY


class DynamicAltitudeModel(AltitudeProvider):
    """f_dyn: static features, projection relative to the growing region and history"""

    def __init__(self, params: ModelParams):
        params.expect(ModelKinds.DYNAMIC)
        self.params = params
        self.hidden_size = params.r

    def bind(self, image: Image) -> AltitudeProvider:
        return _BoundDynamic(self.params, image)

    def evaluate(self, edge, u, v, assignment, hidden):
        raise ContractViolation("bind the dynamic model to an image before evaluating")


class _BoundDynamic(AltitudeProvider):
    def __init__(self, params: ModelParams, image: Image):
        _check_image(params, image)
        self.hidden_size = params.r
        self.b = params.blocks()
        self.width = image.graph.width
        self.windows = graph_windows(image.graph, params.patch_radius)
        w = self.b["hidden_w"]
        split = w.shape[1] - N_DIRECTIONS
        # static branch is precomputed for every target node and direction
        pre = all_patches(image, params.patch_radius) @ w[:, :split].T + self.b["hidden_b"]
        self.static_pre = pre[:, None, :] + w[:, split:].T[None, :, :]

    def evaluate(self, edge, u, v, assignment, hidden):
        reference = int(assignment[u])
        if not reference:
            raise ContractViolation(f"source node {u} of edge {edge} is unassigned")
        if hidden.shape != (self.hidden_size,):
            raise ValueError(f"hidden state has length {hidden.shape}, expected {self.hidden_size}")
        projection = projection_patch(assignment[self.windows[v]], reference)
        pre = self.static_pre[v, _direction(self.width, u, v)] + self.b["proj_w"] @ projection
        h_next, _ = gru_forward(self.b, np.tanh(pre), hidden)
        return float(self.b["readout_w"] @ h_next + self.b["readout_b"][0]), h_next


def predict_dynamic(params: ModelParams, image: Image, edge: int, u: int, v: int,
                    assignment: np.ndarray, hidden_u: np.ndarray) -> Tuple[float, np.ndarray]:
    params.expect(ModelKinds.DYNAMIC)
    return _BoundDynamic(params, image).evaluate(edge, u, v, np.asarray(assignment),
                                                 np.asarray(hidden_u, dtype=np.float64))


def make_provider(params: ModelParams) -> AltitudeProvider:
    if params.architecture == ModelKinds.STATIC:
        return StaticAltitudeModel(params)
    if params.architecture == ModelKinds.DYNAMIC:
        return DynamicAltitudeModel(params)
    raise ValueError(f"{params.architecture} parameters do not define an altitude model")


def _scored_edges(weights: Mapping[int, float], free: GrowthRecord,
                  constrained: GrowthRecord) -> List[Tuple[int, float, GrowthRecord]]:
    """(edge, weight, record that evaluated it); E_down edges score in the constrained run"""
    scored = []
    for edge in sorted(weights):
        weight = float(weights[edge])
        if weight == 0.0:
            continue
        record = constrained if weight > 0 else free
        if edge not in record.evaluated_source:
            run = "constrained" if weight > 0 else "free"
            raise ContractViolation(f"edge {edge} carries weight but was never evaluated in the {run} run")
        scored.append((edge, weight, record))
    return scored


def _static_objective(params: ModelParams, scored, image: Image,
                      need_grad: bool) -> Tuple[float, np.ndarray]:
    grad = np.zeros(params.size)
    if not scored:
        return 0.0, grad
    b = params.blocks()
    rows, R = [], []
    for edge, weight, record in scored:
        u = record.evaluated_source[edge]
        v = record.other_endpoint(edge, u)
        rows.append(_static_input(image, v, _direction(image.graph.width, u, v), params.patch_radius))
        R.append(weight)
    X, R = np.array(rows), np.array(R)
    A = np.tanh(X @ b["hidden_w"].T + b["hidden_b"])
    loss = float(R @ (A @ b["readout_w"] + b["readout_b"][0]))
    if need_grad:
        g = params.blocks(grad)
        delta = (R[:, None] * b["readout_w"][None, :]) * (1.0 - A ** 2)
        g["readout_w"][:] = R @ A
        g["readout_b"][:] = R.sum()
        g["hidden_w"][:] = delta.T @ X
        g["hidden_b"][:] = delta.sum(axis=0)
    return loss, grad


@dataclass
class _Step:
    static_in: np.ndarray
    projection: np.ndarray
    x: np.ndarray
    cache: _CellCache


def _replay_chain(record: GrowthRecord, edge: int, truncation: int) -> Tuple[List[Tuple[int, int]], np.ndarray]:
    """(source, target) steps from the seed side to `edge`, at most `truncation` long,
    and the stored hidden state the first step starts from"""
    u = record.evaluated_source[edge]
    chain = path_to_seed(record, u) + [edge]
    chain = chain[-truncation:]
    steps = []
    for step_edge in chain:
        source = record.evaluated_source[step_edge]
        steps.append((source, record.other_endpoint(step_edge, source)))
    return steps, record.hidden[steps[0][0]]


def _dynamic_objective(params: ModelParams, scored, image: Image, truncation: int,
                       need_grad: bool) -> Tuple[float, np.ndarray]:
    grad = np.zeros(params.size)
    b = params.blocks()
    g = params.blocks(grad)
    windows = graph_windows(image.graph, params.patch_radius)
    width = image.graph.width
    loss = 0.0

    for edge, weight, record in scored:
        chain, h = _replay_chain(record, edge, truncation)
        steps: List[_Step] = []
        for source, target in chain:
            static_in = _static_input(image, target, _direction(width, source, target),
                                      params.patch_radius)
            labels = record.labels_seen_from(source, windows[target])
            projection = projection_patch(labels, int(record.assignment[source]))
            x = np.tanh(b["hidden_w"] @ static_in + b["proj_w"] @ projection + b["hidden_b"])
            h, cache = gru_forward(b, x, h)
            steps.append(_Step(static_in, projection, x, cache))
        loss += weight * float(b["readout_w"] @ h + b["readout_b"][0])
        if not need_grad:
            continue

        g["readout_w"] += weight * h
        g["readout_b"] += weight
        dh = weight * b["readout_w"]
        for step in reversed(steps):
            dx, dh = gru_backward(b, g, step.cache, dh)
            d_pre = dx * (1.0 - step.x ** 2)
            g["hidden_w"] += np.outer(d_pre, step.static_in)
            g["proj_w"] += np.outer(d_pre, step.projection)
            g["hidden_b"] += d_pre
    return loss, grad


def objective_and_gradient(params: ModelParams, weights: Mapping[int, float], free: GrowthRecord,
                           constrained: GrowthRecord, image: Image,
                           truncation: int = DEFAULT_TRUNCATION,
                           need_grad: bool = True) -> Tuple[float, np.ndarray]:
    """Sum of R(e) f(e) with every scored edge replayed in the run that evaluated it"""
    _check_image(params, image)
    if image.graph != free.graph or image.graph != constrained.graph:
        raise ValueError("image and growth records live on different grids")
    scored = _scored_edges(weights, free, constrained)
    if params.architecture == ModelKinds.STATIC:
        return _static_objective(params, scored, image, need_grad)
    if params.architecture == ModelKinds.DYNAMIC:
        return _dynamic_objective(params, scored, image, truncation, need_grad)
    raise ValueError(f"{params.architecture} parameters do not define an altitude model")


def grad_structured(params: ModelParams, weights: Mapping[int, float], free: GrowthRecord,
                    constrained: GrowthRecord, image: Image,
                    truncation: int = DEFAULT_TRUNCATION) -> np.ndarray:
    return objective_and_gradient(params, weights, free, constrained, image, truncation)[1]


def structured_objective(params: ModelParams, weights: Mapping[int, float], free: GrowthRecord,
                         constrained: GrowthRecord, image: Image,
                         truncation: int = DEFAULT_TRUNCATION) -> float:
    return objective_and_gradient(params, weights, free, constrained, image, truncation,
                                  need_grad=False)[0]
