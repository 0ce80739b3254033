"""
Structured loss - incorrect nodes, root error edges and per-edge weights from a free and a
ground-truth-constrained growth run
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Mapping, Set, Tuple

import numpy as np

from ..utils.config import WeightModes
from ..utils.errors import ContractViolation, InconsistentStateError
from .msf import GrowthRecord, path_to_seed

logger = logging.getLogger(__name__)

RHO = "rho"
RHO_STAR = "rho_star"


@dataclass(frozen=True)
class ErrorAnalysis:
    incorrect_nodes: FrozenSet[int] = frozenset()
    rho: Mapping[int, int] = field(default_factory=dict)
    rho_star: Mapping[int, int] = field(default_factory=dict)
    e_up: FrozenSet[int] = frozenset()
    e_down: FrozenSet[int] = frozenset()
    tree_dist: Mapping[Tuple[int, str], int] = field(default_factory=dict)
    weights: Mapping[int, float] = field(default_factory=dict)

    def with_weights(self, weights: Mapping[int, float]) -> "ErrorAnalysis":
        return replace(self, weights=dict(weights))


def _check_comparable(free: GrowthRecord, constrained: GrowthRecord):
    if free.graph != constrained.graph:
        raise ValueError("growth records live on different grids")
    if free.seeds != constrained.seeds:
        raise ValueError("growth records were grown from different seeds")


def find_incorrect_nodes(free: GrowthRecord, constrained: GrowthRecord) -> Set[int]:
    """Nodes whose constrained topographic distance strictly exceeds the free one"""
    _check_comparable(free, constrained)
    reachable = constrained.assignment > 0
    unreached = np.setdiff1d(constrained.unassigned_nodes, free.unassigned_nodes)
    if unreached.size:
        logger.warning(f"{unreached.size} nodes unreachable without crossing ground-truth cuts; "
                       f"they are excluded from the error analysis")
    incorrect = reachable & (constrained.path_max > free.path_max)
    return set(int(w) for w in np.flatnonzero(incorrect))


def find_root_edges(free: GrowthRecord, constrained: GrowthRecord,
                    incorrect: Set[int]) -> ErrorAnalysis:
    """rho(w): first edge of the free path crossing a GT cut.
    rho*(w): first edge of the GT-admissible path that is not in the free forest."""
    _check_comparable(free, constrained)
    gt_cut = constrained.forbidden
    free_tree = free.tree_edges()
    rho, rho_star, tree_dist = {}, {}, {}

    for w in sorted(incorrect):
        phi = path_to_seed(free, w)
        index = next((i for i, e in enumerate(phi) if e in gt_cut), None)
        if index is None:
            raise InconsistentStateError(f"incorrect node {w} has no ground-truth cut on its free path")
        rho[w] = phi[index]
        tree_dist[(w, RHO)] = len(phi) - 1 - index

        psi = path_to_seed(constrained, w)
        index = next((i for i, e in enumerate(psi) if e not in free_tree), None)
        if index is None:
            raise InconsistentStateError(f"incorrect node {w} has a constrained path inside the free forest")
        rho_star[w] = psi[index]
        tree_dist[(w, RHO_STAR)] = len(psi) - 1 - index

    return ErrorAnalysis(incorrect_nodes=frozenset(incorrect), rho=rho, rho_star=rho_star,
                         e_up=frozenset(rho.values()), e_down=frozenset(rho_star.values()),
                         tree_dist=tree_dist)


def weights_binary(analysis: ErrorAnalysis) -> Dict[int, float]:
    """R(e): +children on E_down, -children on E_up"""
    weights: Dict[int, float] = {}
    for w in sorted(analysis.incorrect_nodes):
        weights[analysis.rho_star[w]] = weights.get(analysis.rho_star[w], 0.0) + 1.0
        weights[analysis.rho[w]] = weights.get(analysis.rho[w], 0.0) - 1.0
    return weights


def weights_discounted(analysis: ErrorAnalysis, gamma: float) -> Dict[int, float]:
    """Children contribute +-gamma^tree_dist instead of +-1; 0^0 = 1"""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"discount factor must lie in [0, 1], got {gamma}")
    weights: Dict[int, float] = {}
    for w in sorted(analysis.incorrect_nodes):
        down, up = analysis.rho_star[w], analysis.rho[w]
        weights[down] = weights.get(down, 0.0) + gamma ** analysis.tree_dist[(w, RHO_STAR)]
        weights[up] = weights.get(up, 0.0) - gamma ** analysis.tree_dist[(w, RHO)]
    return weights


def structured_loss(weights: Mapping[int, float], free: GrowthRecord,
                    constrained: GrowthRecord) -> float:
    """Sum of R(e) f(e), each root edge scored with the altitude of the run that produced it"""
    total = 0.0
    for edge in sorted(weights):
        weight = float(weights[edge])
        if weight == 0.0:
            continue
        record = constrained if weight > 0 else free
        if edge not in record.evaluated_altitude:
            raise ContractViolation(f"edge {edge} carries weight but was never evaluated")
        total += weight * record.evaluated_altitude[edge]
    return total


def perceptron_loss(free: GrowthRecord, constrained: GrowthRecord) -> float:
    """Sum over nodes of constrained minus free topographic distance"""
    _check_comparable(free, constrained)
    scored = np.isfinite(free.path_max) & np.isfinite(constrained.path_max)
    return float(np.sum(constrained.path_max[scored] - free.path_max[scored]))


def analyze(free: GrowthRecord, constrained: GrowthRecord, weight_mode: str = WeightModes.BINARY,
            gamma: float = 1.0) -> ErrorAnalysis:
    """Full error analysis with weights for the chosen mode"""
    analysis = find_root_edges(free, constrained, find_incorrect_nodes(free, constrained))
    if weight_mode == WeightModes.BINARY:
        weights = weights_binary(analysis)
    elif weight_mode == WeightModes.DISCOUNTED:
        weights = weights_discounted(analysis, gamma)
    else:
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    return analysis.with_weights(weights)


def false_cut_equality_rate(analysis: ErrorAnalysis, constrained: GrowthRecord) -> float:
    """Share of incorrect nodes whose constrained distance equals f(rho*); 1.0 when V_ is empty"""
    if not analysis.incorrect_nodes:
        return 1.0
    equal = sum(constrained.path_max[w] == constrained.evaluated_altitude[analysis.rho_star[w]]
                for w in analysis.incorrect_nodes)
    rate = equal / len(analysis.incorrect_nodes)
    if rate < 1.0:
        logger.debug(f"False-cut altitude equals the constrained distance for {rate:.1%} of incorrect nodes")
    return rate
