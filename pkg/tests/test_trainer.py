import logging
import math

import numpy as np
import pandas as pd
import pytest

from msfseg.engine.grid import LEFT, RIGHT, GridGraph, Image, SeedSet, Segmentation
from msfseg.models.params import init_params, load_model
from msfseg.training.trainer import (TRACE_COLUMNS, EpochStats, StructuredTrainer, epoch_step,
                                     evaluate, fit)
from msfseg.utils.config import ModelConfig, ModelKinds, TrainConfig, WeightModes
from msfseg.utils.errors import TrainingDivergedError

from conftest import small_params, zeroed


def _rightward_params():
    """Static model whose only nonzero path makes steps to the right cost tanh(1)"""
    zero = zeroed(small_params(ModelKinds.STATIC, hidden=2))
    theta = np.zeros(zero.size)
    blocks = zero.blocks(theta)
    blocks["hidden_w"][0, 9 + RIGHT] = 1.0
    blocks["readout_w"][0] = 1.0
    return zero.with_theta(theta)


def _rightward_params_like(params):
    """Offset that makes rightward steps expensive, so training starts from a leak"""
    offset = np.zeros(params.size)
    blocks = params.blocks(offset)
    blocks["hidden_w"][0, 9 + RIGHT] = 3.0
    blocks["hidden_w"][0, 9 + LEFT] = -3.0
    blocks["readout_w"][0] = 3.0
    return offset


def _line3_instance(value=0.0):
    image = Image.from_array(np.full((1, 3), value))
    return image, Segmentation(image.graph, [1, 1, 2]), SeedSet(((0, 1), (2, 2)))


def _single_region(height=3, width=3, seed=0):
    image = Image.from_array(np.random.default_rng(seed).normal(size=(height, width)))
    return image, Segmentation(image.graph, [1] * (height * width)), SeedSet(((0, 1),))


def test_epoch_step_on_a_leaking_line():
    params = _rightward_params()
    grad, stats = epoch_step(params, *_line3_instance())
    t = math.tanh(1.0)
    assert stats.incorrect_count == 1
    assert stats.loss == pytest.approx(t)
    assert stats.perceptron_loss == pytest.approx(t)
    assert stats.arand == pytest.approx(2 / 3)
    g = params.blocks(grad)
    assert g["readout_w"].tolist() == pytest.approx([t, 0.0])
    assert g["readout_b"][0] == 0.0
    assert g["hidden_w"][0, 9 + LEFT] == pytest.approx(-1.0)
    assert g["hidden_w"][0, 9 + RIGHT] == pytest.approx(1.0 - t ** 2)
    assert stats.gradient_norm == pytest.approx(np.linalg.norm(grad))


def test_a_descent_step_lowers_the_loss():
    params = _rightward_params()
    instance = _line3_instance()
    grad, before = epoch_step(params, *instance)
    _, after = epoch_step(params.with_theta(params.theta - 0.05 * grad), *instance)
    assert after.loss < before.loss


def test_separated_instance_has_zero_gradient():
    params = small_params(ModelKinds.DYNAMIC, r=3, seed=2)
    config = TrainConfig(model_kind=ModelKinds.DYNAMIC)
    grad, stats = epoch_step(params, *_single_region(), config)
    assert not grad.any()
    assert stats == EpochStats(loss=0.0, perceptron_loss=0.0, incorrect_count=0, arand=0.0,
                               gradient_norm=0.0)


def test_zero_loss_corpus_leaves_parameters_unchanged():
    params = small_params(ModelKinds.STATIC, seed=1)
    config = TrainConfig(model_kind=ModelKinds.STATIC, epochs=5)
    trained, stats = StructuredTrainer(config, params).fit([_single_region(seed=s) for s in range(3)])
    np.testing.assert_array_equal(trained.theta, params.theta)
    assert len(stats) == 3


@pytest.mark.parametrize("seeds", [
    SeedSet(((0, 1),)),
    SeedSet(((0, 1), (1, 2))),
    SeedSet(((0, 2), (2, 1))),
])
def test_seeds_must_match_ground_truth(seeds):
    image, gt, _ = _line3_instance()
    with pytest.raises(ValueError):
        epoch_step(small_params(ModelKinds.STATIC), image, gt, seeds)


def test_image_and_ground_truth_grids_must_match():
    image, _, seeds = _line3_instance()
    gt = Segmentation(GridGraph(3, 1), [1, 1, 2])
    with pytest.raises(ValueError):
        epoch_step(small_params(ModelKinds.STATIC), image, gt, seeds)


def test_trainer_rejects_mismatched_model_kind_and_empty_corpus():
    with pytest.raises(ValueError):
        StructuredTrainer(TrainConfig(model_kind=ModelKinds.DYNAMIC), small_params(ModelKinds.STATIC))
    with pytest.raises(ValueError):
        fit([], TrainConfig())


def _random_corpus(count=3, width=5):
    rng = np.random.default_rng(21)
    corpus = []
    for _ in range(count):
        image = Image.from_array(rng.normal(size=(2, width)))
        gt = Segmentation(image.graph, [1] * 2 + [2] * (width - 2) + [1] * 2 + [2] * (width - 2))
        corpus.append((image, gt, SeedSet(((0, 1), (2 * width - 1, 2)))))
    return corpus


@pytest.mark.parametrize("kind", [ModelKinds.STATIC, ModelKinds.DYNAMIC])
def test_single_worker_training_is_deterministic(kind):
    config = TrainConfig(model_kind=kind, epochs=3, learning_rate=0.01, rng_seed=4,
                         weight_mode=WeightModes.DISCOUNTED)
    model = ModelConfig(patch_radius=1, hidden_size=4, r=3)
    first, first_stats = fit(_random_corpus(), config, model)
    second, second_stats = fit(_random_corpus(), config, model)
    np.testing.assert_array_equal(first.theta, second.theta)
    assert first_stats == second_stats


def test_toy_corpus_is_separated():
    config = TrainConfig(model_kind=ModelKinds.STATIC, learning_rate=0.05, momentum=0.9, epochs=500,
                         weight_mode=WeightModes.BINARY, rng_seed=0)
    params = init_params(ModelKinds.STATIC, 1, 1, 8, rng=np.random.default_rng(0))
    params = params.with_theta(params.theta + _rightward_params_like(params))
    corpus = [_line3_instance(0.0), _line3_instance(0.5)]
    trained, stats = fit(corpus, config, params=params)
    assert stats[0].incorrect_count >= 1
    assert len(stats) < 2 * 500
    assert stats[-1].incorrect_count == 0 and stats[-2].incorrect_count == 0
    aggregate = evaluate(trained, corpus, ModelKinds.STATIC, tolerance=0)
    assert [report.arand for report in aggregate.reports] == [0.0, 0.0]


def test_asynchronous_workers_apply_every_gradient():
    config = TrainConfig(model_kind=ModelKinds.STATIC, epochs=2, workers=2)
    trainer = StructuredTrainer(config, small_params(ModelKinds.STATIC))
    _, stats = trainer.fit([_single_region(seed=s) for s in range(4)])
    assert len(stats) == 4
    assert [row.step for row in trainer.trace] == [1, 2, 3, 4]


def test_checkpoints_and_trace(tmp_path):
    config = TrainConfig(model_kind=ModelKinds.STATIC, epochs=1, checkpoint_every=1)
    trainer = StructuredTrainer(config, small_params(ModelKinds.STATIC), checkpoint_dir=tmp_path / "ckpt")
    trainer.fit([_single_region(seed=s) for s in range(2)])
    assert sorted(p.name for p in (tmp_path / "ckpt").iterdir()) == ["step_000001.lwm", "step_000002.lwm"]
    assert load_model(tmp_path / "ckpt" / "step_000002.lwm").architecture == ModelKinds.STATIC

    trace = pd.read_csv(trainer.write_trace(tmp_path / "trace.csv"), dtype={"image_id": str})
    assert list(trace.columns) == TRACE_COLUMNS
    assert trace["step"].tolist() == [1, 2]
    assert set(trace["image_id"]) == {"0000", "0001"}


def test_non_finite_gradient_stops_training():
    params = small_params(ModelKinds.STATIC)
    trainer = StructuredTrainer(TrainConfig(model_kind=ModelKinds.STATIC), params)
    stats = EpochStats(loss=1.0, perceptron_loss=1.0, incorrect_count=1, arand=0.5, gradient_norm=np.nan)
    with pytest.raises(TrainingDivergedError) as info:
        trainer.apply(np.full(params.size, np.nan), stats, "0007", 1)
    assert info.value.step == 1 and info.value.image_id == "0007"
    np.testing.assert_array_equal(trainer.params.theta, params.theta)


def test_evaluate_scores_every_instance():
    params = small_params(ModelKinds.DYNAMIC, r=3)
    corpus = _random_corpus(count=4)
    aggregate = evaluate(params, corpus, ModelKinds.DYNAMIC, tolerance=0)
    assert len(aggregate) == 4
    assert aggregate.image_ids == ("0000", "0001", "0002", "0003")
    assert all(0.0 <= report.arand <= 1.0 for report in aggregate.reports)
    with pytest.raises(ValueError):
        evaluate(params, corpus, ModelKinds.STATIC, tolerance=0)


def test_epoch_summary_reports_steps_below_the_perceptron_loss(caplog):
    trainer = StructuredTrainer(TrainConfig(model_kind=ModelKinds.STATIC, epochs=1), _rightward_params())
    with caplog.at_level(logging.INFO, logger="msfseg.training.trainer"):
        trainer.fit([_line3_instance()])
    assert "structured loss below the perceptron loss on" in caplog.text
    assert "/1 steps" in caplog.text
