import itertools
import math

import numpy as np
import pytest

from mrckit.core import Dataset, FeatureMap, LogLoss, ZeroOneLoss
from mrckit.features import fit_thresholds, StumpSpec
from mrckit.marginals import (
    adversarial01_objective,
    instance_offset_log,
    instance_offset_zero_one,
    logreg_objective,
    predict_fixed_marginal,
    train_adversarial01,
    train_logreg,
)
from mrckit.solver import SolverConfig, max_offset_log, max_offset_zero_one


def random_data(rng, n=40, dim=2, k=2):
    return Dataset(
        instances=rng.normal(size=(n, dim)).round(1),
        labels=rng.integers(1, k + 1, size=n),
        num_classes=k,
    )


def minimax_hinge_erm(w, fm, data):
    """Subset-enumeration form of the adversarial 0-1 empirical risk."""
    s = fm.score_matrix(data.instances, w)
    k = fm.num_classes
    total = 0.0
    for i in range(data.n):
        best = -math.inf
        for size in range(1, k + 1):
            for subset in itertools.combinations(range(k), size):
                val = (
                    sum(s[i, c] - s[i, data.labels[i] - 1] for c in subset) + size - 1
                ) / size
                best = max(best, val)
        total += best
    return total / data.n


def logistic_erm(w, fm, data):
    s = fm.score_matrix(data.instances, w)
    picked = s[np.arange(data.n), data.labels - 1]
    return float(np.mean(np.log(np.exp(s).sum(axis=1)) - picked))


def test_instance_offsets_examples():
    fm = FeatureMap(num_classes=3, thresholds=())
    # zero weights: min over subset sizes of (1 - k)/k = -2/3 and -log 3
    assert instance_offset_zero_one(np.zeros(3), fm, [0.0]) == pytest.approx(-2.0 / 3.0)
    assert instance_offset_log(np.zeros(3), fm, [0.0]) == pytest.approx(-math.log(3.0))


def test_instance_offsets_match_atom_offsets():
    rng = np.random.default_rng(0)
    fm = FeatureMap(num_classes=2, thresholds=((1, 0.0),))
    for _ in range(50):
        w = rng.normal(size=fm.dim)
        x = rng.normal(size=1)
        scores = fm.score_matrix(x[None, :], w)
        assert instance_offset_zero_one(w, fm, x) == max_offset_zero_one(scores)[0]
        assert instance_offset_log(w, fm, x) == max_offset_log(scores)[0]


def test_adversarial_objective_at_zero():
    rng = np.random.default_rng(1)
    for k in (2, 3):
        data = random_data(rng, k=k)
        fm = fit_thresholds(data, StumpSpec(4))
        value, _ = adversarial01_objective(np.zeros(fm.dim), fm, data, 0.0)
        assert value == pytest.approx(1.0 - 1.0 / k)


def test_adversarial_objective_equals_minimax_hinge():
    rng = np.random.default_rng(2)
    for k in (2, 3, 4):
        data = random_data(rng, n=25, k=k)
        fm = fit_thresholds(data, StumpSpec(3))
        for _ in range(20):
            w = rng.normal(size=fm.dim)
            value, _ = adversarial01_objective(w, fm, data, 0.0)
            assert value == pytest.approx(minimax_hinge_erm(w, fm, data), abs=1e-12)


def test_adversarial_l1_term():
    rng = np.random.default_rng(3)
    data = random_data(rng)
    fm = fit_thresholds(data, StumpSpec(3))
    w = rng.normal(size=fm.dim)
    bare, _ = adversarial01_objective(w, fm, data, 0.0)
    reg, _ = adversarial01_objective(w, fm, data, 0.5)
    assert reg == pytest.approx(bare + 0.5 * np.abs(w).sum() / math.sqrt(data.n))


def test_logreg_objective_at_zero():
    rng = np.random.default_rng(4)
    data = random_data(rng, k=3)
    fm = fit_thresholds(data, StumpSpec(3))
    value, _ = logreg_objective(np.zeros(fm.dim), fm, data, 0.0)
    assert value == pytest.approx(math.log(3.0))


def test_logreg_objective_equals_mean_nll():
    rng = np.random.default_rng(5)
    for k in (2, 3):
        data = random_data(rng, k=k)
        fm = fit_thresholds(data, StumpSpec(3))
        for _ in range(20):
            w = rng.normal(size=fm.dim)
            value, _ = logreg_objective(w, fm, data, 0.0)
            assert value == pytest.approx(logistic_erm(w, fm, data), abs=1e-12)


def test_logreg_single_sample_hand_formula():
    # one sample, two labels, one threshold separating them: the objective is
    # log(1 + exp(-margin)) in the effective score difference
    data = Dataset(instances=[[0.0]], labels=[1], num_classes=2)
    fm = FeatureMap(num_classes=2, thresholds=((1, 0.5),))
    for margin in (0.0, 1.0, -1.0):
        # psi = [1, 1] here, so only the intercept coordinate carries weight
        w = np.array([margin, 0.0, 0.0, 0.0])
        value, _ = logreg_objective(w, fm, data, 0.0)
        assert value == pytest.approx(math.log(1.0 + math.exp(-margin)), abs=1e-12)


def test_logreg_gradient_matches_central_differences():
    rng = np.random.default_rng(6)
    data = random_data(rng, n=30)
    fm = fit_thresholds(data, StumpSpec(3))
    eps = 1e-6
    for _ in range(5):
        w = rng.normal(size=fm.dim)
        w = np.where(np.abs(w) < 0.1, 0.4, w)  # avoid the |w| kink
        _, grad = logreg_objective(w, fm, data, 0.3)
        fd = np.zeros_like(w)
        for i in range(fm.dim):
            e = np.zeros_like(w)
            e[i] = eps
            fd[i] = (
                logreg_objective(w + e, fm, data, 0.3)[0]
                - logreg_objective(w - e, fm, data, 0.3)[0]
            ) / (2 * eps)
        assert np.abs(grad - fd).max() / max(1.0, np.abs(fd).max()) < 1e-5


def test_adversarial_training_drives_separable_loss_down():
    rng = np.random.default_rng(7)
    x = np.concatenate([rng.normal(-2.0, 0.3, 40), rng.normal(2.0, 0.3, 40)])
    data = Dataset(
        instances=x[:, None], labels=[1] * 40 + [2] * 40, num_classes=2
    )
    fm = fit_thresholds(data, StumpSpec(4))
    model = train_adversarial01(data, fm, 0.0, SolverConfig(max_iters=20000, c=1.0))
    assert model.variant == "instance_marginal"
    assert model.offset is None
    assert model.objective_value < 0.05


def test_logreg_training_matches_scipy_optimum():
    from scipy.optimize import minimize

    rng = np.random.default_rng(8)
    data = random_data(rng, n=60)
    fm = fit_thresholds(data, StumpSpec(3))
    model = train_logreg(data, fm, 0.0, SolverConfig(max_iters=30000, c=1.0))
    ref = minimize(
        lambda w: logreg_objective(w, fm, data, 0.0)[0],
        np.zeros(fm.dim),
        jac=lambda w: logreg_objective(w, fm, data, 0.0)[1],
        method="L-BFGS-B",
    )
    # subgradient steps close in at O(1/sqrt(T)); 1e-2 is what the budget buys
    assert model.objective_value <= ref.fun + 1e-2
    assert model.objective_value >= ref.fun - 1e-9


def test_predict_fixed_marginal_rules():
    rng = np.random.default_rng(9)
    data = random_data(rng, n=30)
    fm = fit_thresholds(data, StumpSpec(3))
    for trainer in (train_adversarial01, train_logreg):
        model = trainer(data, fm, 0.25, SolverConfig(max_iters=500))
        probs = predict_fixed_marginal(model, data.instances)
        assert np.all(probs >= -1e-12)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_fixed_marginal_log_rule_is_softmax():
    rng = np.random.default_rng(10)
    data = random_data(rng, n=30)
    fm = fit_thresholds(data, StumpSpec(3))
    model = train_logreg(data, fm, 0.0, SolverConfig(max_iters=300))
    probs = predict_fixed_marginal(model, data.instances)
    s = fm.score_matrix(data.instances, model.weights)
    e = np.exp(s - s.max(axis=1, keepdims=True))
    np.testing.assert_allclose(probs, e / e.sum(axis=1, keepdims=True), atol=1e-12)


def test_fixed_marginal_zero_one_uniform_at_zero_weights():
    data = Dataset(instances=[[0.0], [1.0]], labels=[1, 2], num_classes=2)
    fm = FeatureMap(num_classes=2, thresholds=((1, 0.5),))
    model = train_adversarial01(data, fm, 1e9, SolverConfig(max_iters=50))
    probs = predict_fixed_marginal(model, data.instances)
    np.testing.assert_allclose(probs, 0.5, atol=1e-6)
