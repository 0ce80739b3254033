import math

import numpy as np
import pytest

from msfseg.engine.grid import GridGraph, Segmentation
from msfseg.evaluation.metrics import (ScoreAggregate, ScoreReport, arand, contingency, score,
                                       summarize, tolerance_mask, voi)
from msfseg.utils.errors import ContractViolation


def _seg(labels, shape=None):
    labels = np.asarray(labels)
    graph = GridGraph(*(shape or (1, labels.size)))
    return Segmentation(graph, labels.reshape(-1))


def test_contingency_rows_follow_prediction():
    table = contingency(_seg([1, 1, 1, 2]), _seg([1, 1, 2, 2]))
    assert table.tolist() == [[2, 1], [0, 1]]


def test_arand_four_node_example():
    # disagreeing pairs (0,2), (1,2) and (2,3) of six
    assert arand(_seg([1, 1, 1, 2]), _seg([1, 1, 2, 2])) == pytest.approx(0.5, abs=1e-12)


def test_adapted_rand_is_one_minus_pair_f_score():
    # precision 1/3, recall 1/2
    value = arand(_seg([1, 1, 1, 2]), _seg([1, 1, 2, 2]), adapted=True)
    assert value == pytest.approx(0.6, abs=1e-12)


def test_voi_split_of_halved_single_region():
    split, merge = voi(_seg([1, 1, 2, 2]), _seg([1, 1, 1, 1]))
    assert split == pytest.approx(math.log(2), abs=1e-12)
    assert merge == pytest.approx(0.0, abs=1e-12)


def test_voi_swaps_under_argument_exchange(rng):
    a = _seg(rng.integers(1, 4, size=20), (4, 5))
    b = _seg(rng.integers(1, 5, size=20), (4, 5))
    split, merge = voi(a, b)
    reverse_split, reverse_merge = voi(b, a)
    assert split == pytest.approx(reverse_merge, abs=1e-12)
    assert merge == pytest.approx(reverse_split, abs=1e-12)


def test_identical_segmentations_score_zero():
    gt = _seg([1, 1, 2, 2, 3, 3])
    report = score(gt, gt)
    assert report.arand == 0.0
    assert report.voi == pytest.approx(0.0, abs=1e-12)
    assert report.scored_nodes == 6


def test_scores_ignore_label_names(rng):
    for _ in range(100):
        pred_labels = rng.integers(1, 4, size=30)
        gt = _seg(rng.integers(1, 4, size=30), (5, 6))
        pred = _seg(pred_labels, (5, 6))
        renamed = _seg(np.array([0, 7, 3, 5])[pred_labels], (5, 6))
        first, second = score(pred, gt), score(renamed, gt)
        assert first.arand == pytest.approx(second.arand, abs=1e-12)
        assert first.voi_split == pytest.approx(second.voi_split, abs=1e-12)
        assert first.voi_merge == pytest.approx(second.voi_merge, abs=1e-12)
        assert 0.0 <= first.arand <= 1.0
        assert first.voi_split >= 0.0 and first.voi_merge >= 0.0


def test_tolerance_mask_excludes_nodes_near_the_boundary():
    gt = _seg([1, 1, 1, 2, 2, 2])
    assert tolerance_mask(gt, 0).all()
    assert tolerance_mask(gt, 0.5).tolist() == [True, True, False, False, True, True]
    assert tolerance_mask(gt, 1).tolist() == [True, False, False, False, False, True]
    assert not tolerance_mask(gt, 2).any()
    assert tolerance_mask(_seg([4, 4, 4]), 5).all()


def test_nodes_at_exactly_the_tolerance_are_excluded():
    gt = _seg([1, 1, 1, 1, 2, 2, 2, 2])
    # boundary nodes 3 and 4; nodes 1 and 6 sit at distance 2
    assert tolerance_mask(gt, 2).tolist() == [True] + [False] * 6 + [True]
    assert tolerance_mask(gt, 1.5).tolist() == [True, True] + [False] * 4 + [True, True]


def test_tolerance_changes_what_is_scored():
    gt = _seg([1, 1, 1, 2, 2, 2])
    pred = _seg([1, 1, 2, 2, 2, 2])
    assert arand(pred, gt) > 0
    report = score(pred, gt, tolerance=1)
    assert report.arand == 0.0
    assert report.scored_nodes == 2


def test_tolerance_that_removes_everything_is_an_error():
    gt = _seg([1, 1, 1, 2, 2, 2])
    with pytest.raises(ValueError):
        score(gt, gt, tolerance=2)


def test_mismatched_grids_and_incomplete_segmentations():
    with pytest.raises(ValueError):
        arand(_seg([1, 2, 2, 1]), _seg([1, 2, 2, 1], (2, 2)))
    with pytest.raises(ContractViolation):
        arand(_seg([1, 0, 2]), _seg([1, 1, 2]))


def test_summarize_mean_and_sample_std():
    reports = [ScoreReport(0.05, 0.1, 0.2, 10), ScoreReport(0.07, 0.3, 0.2, 10)]
    summary = summarize(reports)
    assert summary["arand"][0] == pytest.approx(0.06)
    assert summary["arand"][1] == pytest.approx(math.sqrt(2) * 0.01)
    assert summary["voi_merge"] == pytest.approx((0.2, 0.0))
    assert summarize(reports[:1])["voi_split"] == (0.1, 0.0)
    with pytest.raises(ValueError):
        summarize([])


def test_score_aggregate():
    aggregate = ScoreAggregate(("0000", "0001"), (ScoreReport(0.1, 0.0, 0.0, 4), ScoreReport(0.3, 0.0, 0.0, 4)))
    assert len(aggregate) == 2
    assert aggregate.summary["arand"][0] == pytest.approx(0.2)
