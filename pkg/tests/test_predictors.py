import math

import numpy as np
import pytest

from mrckit.core import (
    AlphaLoss,
    ConstraintAtoms,
    ExpectationBox,
    FeatureMap,
    LogLoss,
    MrcModel,
    ZeroOneLoss,
)
from mrckit.predictors import (
    alpha_probs,
    log_probs,
    predict_alpha,
    predict_log,
    predict_zero_one,
    rule_probs,
    sample_labels,
    zero_one_probs,
)
from mrckit.solver import SolverConfig, max_offset_alpha, train_mrc

ZO = ZeroOneLoss()
LG = LogLoss()


def make_model(loss, weights, offset, fm):
    return MrcModel(
        loss=loss,
        weights=np.asarray(weights, dtype=float),
        offset=offset,
        objective_value=0.0,
        num_classes=fm.num_classes,
        feature_map=fm,
    )


def test_zero_one_uniform_when_normalizer_vanishes():
    probs = zero_one_probs(np.array([[-2.0, -3.0]]), 0.0)
    np.testing.assert_allclose(probs, [[0.5, 0.5]])


def test_zero_one_uniform_offset():
    # offset 1/K - 1 with zero scores leaves exactly uniform masses
    probs = zero_one_probs(np.zeros((1, 4)), 0.25 - 1.0)
    np.testing.assert_allclose(probs, 0.25)


def test_zero_one_positive_part_normalization():
    probs = zero_one_probs(np.array([[0.1, -1.5]]), 0.0)
    np.testing.assert_allclose(probs, [[1.0, 0.0]])


def test_log_probs_softmax_values():
    np.testing.assert_allclose(log_probs(np.array([[0.0, 0.0]])), 0.5)
    np.testing.assert_allclose(
        log_probs(np.array([[math.log(2.0), 0.0]])), [[2.0 / 3.0, 1.0 / 3.0]]
    )


def test_log_probs_shift_invariance():
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = rng.normal(size=(1, 3))
        shifted = log_probs(s + rng.normal())
        np.testing.assert_allclose(shifted, log_probs(s), atol=1e-12)


def test_alpha_probs_uniform_at_zero_weights():
    off = max_offset_alpha(np.zeros(2), 2.0)
    probs = alpha_probs(np.zeros((1, 2)), off, 2.0)
    np.testing.assert_allclose(probs, 0.5, atol=1e-9)


def test_alpha_probs_distribute_slack_uniformly():
    # base masses 0.25 each leave slack 0.5 split as 0.25 per label
    # ((s + off)/beta + 1)^beta = 0.25 with beta = 2 needs s + off = -1
    probs = alpha_probs(np.full((1, 2), -1.0), 0.0, 2.0)
    np.testing.assert_allclose(probs, [[0.5, 0.5]])
    base = ((-1.0) / 2.0 + 1.0) ** 2.0
    assert probs[0, 0] >= base


def test_alpha_probs_reject_infeasible_rows():
    with pytest.raises(RuntimeError):
        alpha_probs(np.full((1, 2), 2.0), 0.0, 2.0)


def test_rows_are_distributions_for_all_losses():
    rng = np.random.default_rng(1)
    fm = FeatureMap(num_classes=3, thresholds=((1, 0.0), (1, 1.0)))
    # the reachable patterns of this map: x <= 0, 0 < x <= 1, x > 1
    atoms = ConstraintAtoms(
        patterns=np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0]]),
        num_classes=3,
    )
    for loss in (ZO, LG, AlphaLoss(2.0), AlphaLoss(0.5)):
        for _ in range(30):
            box = _consistent_box(rng, atoms)
            model = train_mrc(loss, box, atoms, SolverConfig(max_iters=200))
            X = rng.normal(size=(20, 1)) * 2.0
            probs = rule_probs(loss, fm.score_matrix(X, model.weights), model.offset)
            assert np.all(probs >= -1e-12)
            np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def _consistent_box(rng, atoms):
    p = rng.random((atoms.count, atoms.num_classes))
    p /= p.sum()
    mean = np.zeros(atoms.dim)
    blk = atoms.block_size
    for j in range(atoms.count):
        for y in range(atoms.num_classes):
            mean[y * blk : (y + 1) * blk] += p[j, y] * atoms.patterns[j]
    return ExpectationBox.from_mean(mean, rng.random(atoms.dim) * 0.3, 25)


def test_feasibility_inheritance_on_atoms():
    # on every training pattern the rule dominates what the dual constraint caps
    rng = np.random.default_rng(2)
    atoms = ConstraintAtoms(
        patterns=np.array([[1.0, 0.0], [1.0, 1.0]]), num_classes=2
    )
    for loss in (ZO, LG):
        for _ in range(25):
            box = _consistent_box(rng, atoms)
            model = train_mrc(loss, box, atoms, SolverConfig(max_iters=500))
            scores = atoms.scores(model.weights)
            probs = rule_probs(loss, scores, model.offset)
            if isinstance(loss, ZeroOneLoss):
                floor = scores + model.offset + 1.0
            else:
                floor = np.exp(scores + model.offset)
            assert np.all(probs >= floor - 1e-9)


def test_alpha_rule_dominates_base_masses():
    rng = np.random.default_rng(3)
    atoms = ConstraintAtoms(patterns=np.array([[1.0, 0.0], [1.0, 1.0]]), num_classes=2)
    for alpha in (0.5, 2.0, 4.0):
        beta = AlphaLoss(alpha).beta
        for _ in range(25):
            box = _consistent_box(rng, atoms)
            model = train_mrc(AlphaLoss(alpha), box, atoms, SolverConfig(max_iters=500))
            scores = atoms.scores(model.weights)
            probs = rule_probs(model.loss, scores, model.offset)
            t = (scores + model.offset) / beta + 1.0
            if beta > 0:
                base = np.clip(t, 0.0, None) ** beta
            else:
                base = np.where(t > 0, np.clip(t, 1e-300, None) ** beta, np.inf)
            assert np.all(probs >= base - 1e-9)


def test_predict_wrappers_and_dispatch():
    fm = FeatureMap(num_classes=2, thresholds=((1, 0.5),))
    X = np.array([[0.0], [1.0]])
    m01 = make_model(ZO, np.zeros(4), -0.5, fm)
    probs = predict_zero_one(m01, X)
    np.testing.assert_allclose(probs, 0.5)
    probs, sampled = predict_zero_one(m01, X, seed=11)
    assert sampled.shape == (2,)
    mlog = make_model(LG, [0.3, 0.0, -0.2, 0.0], -0.7, fm)
    lp, labels = predict_log(mlog, X)
    assert labels[0] == 1  # highest score wins
    off = max_offset_alpha(np.zeros(2), 2.0)
    ma = make_model(AlphaLoss(2.0), np.zeros(4), off, fm)
    np.testing.assert_allclose(predict_alpha(ma, X), 0.5, atol=1e-9)
    with pytest.raises(TypeError):
        predict_log(m01, X)


def test_argmax_tie_breaks_to_smallest_label():
    fm = FeatureMap(num_classes=3, thresholds=())
    mlog = make_model(LG, np.zeros(3), -math.log(3.0), fm)
    _, labels = predict_log(mlog, np.zeros((4, 1)))
    assert labels.tolist() == [1, 1, 1, 1]


def test_sampling_is_reproducible():
    rng = np.random.default_rng(4)
    probs = rng.random((50, 3))
    probs /= probs.sum(axis=1, keepdims=True)
    a = sample_labels(probs, seed=123)
    b = sample_labels(probs, seed=123)
    c = sample_labels(probs, seed=124)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.min() >= 1 and a.max() <= 3


def test_sampling_frequencies_track_probabilities():
    probs = np.tile([[0.8, 0.2]], (4000, 1))
    draws = sample_labels(probs, seed=5)
    assert abs((draws == 1).mean() - 0.8) < 0.03
