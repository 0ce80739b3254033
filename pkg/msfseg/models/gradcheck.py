"""
Finite-difference verification of analytic gradients
"""
import logging
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..engine.grid import Image
from ..engine.msf import GrowthRecord
from .altitude import DEFAULT_TRUNCATION, objective_and_gradient
from .params import ModelParams

logger = logging.getLogger(__name__)

Objective = Callable[[ModelParams], Tuple[float, np.ndarray]]


def structured_objective_fn(weights: Mapping[int, float], free: GrowthRecord,
                            constrained: GrowthRecord, image: Image,
                            truncation: int = DEFAULT_TRUNCATION) -> Objective:
    """Objective over frozen growth records: perturbing parameters changes altitudes only"""
    def objective(params: ModelParams) -> Tuple[float, np.ndarray]:
        return objective_and_gradient(params, weights, free, constrained, image, truncation)
    return objective


def finite_diff_check(params: ModelParams, objective: Objective, epsilon: float = 1e-5,
                      n_coords: int = 50, rng: Optional[np.random.Generator] = None,
                      coords: Optional[Iterable[int]] = None) -> float:
    """Max relative error between the analytic gradient and central differences"""
    _, analytic = objective(params)
    if coords is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        count = min(max(n_coords, 50), params.size)
        coords = rng.choice(params.size, size=count, replace=False)
    worst = 0.0
    for index in coords:
        plus = params.theta.copy()
        plus[index] += epsilon
        minus = params.theta.copy()
        minus[index] -= epsilon
        central = (objective(params.with_theta(plus))[0]
                   - objective(params.with_theta(minus))[0]) / (2.0 * epsilon)
        error = abs(analytic[index] - central) / max(1e-8, abs(analytic[index]) + abs(central))
        worst = max(worst, error)
    logger.debug(f"Gradient check at epsilon={epsilon}: max relative error {worst:.3e}")
    return worst


def epsilon_sweep(params: ModelParams, objective: Objective,
                  epsilons: Sequence[float] = (1e-3, 1e-4, 1e-5),
                  coords: Optional[Iterable[int]] = None,
                  rng: Optional[np.random.Generator] = None) -> Dict[float, float]:
    """finite_diff_check over several step sizes on one coordinate sample"""
    if coords is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        coords = rng.choice(params.size, size=min(50, params.size), replace=False)
    coords = list(coords)
    return {eps: finite_diff_check(params, objective, eps, coords=coords) for eps in epsilons}
