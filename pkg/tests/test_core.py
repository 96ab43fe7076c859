import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrckit.core import (
    AlphaLoss,
    ConstraintAtoms,
    Dataset,
    ExpectationBox,
    FeatureMap,
    LogRelativeLoss,
    MrcModel,
    BoundReport,
    ZeroOneLoss,
    beta_of_alpha,
)


def test_beta_fixed_point():
    assert beta_of_alpha(2.0) == 2.0


def test_beta_half():
    assert beta_of_alpha(0.5) == -1.0


def test_beta_large_alpha_limit():
    # alpha -> inf recovers the 0-1 regime where beta -> 1
    assert abs(beta_of_alpha(1e9) - 1.0) < 2e-9


@pytest.mark.parametrize("bad", [0.0, 1.0, -2.0, float("inf"), float("nan")])
def test_beta_rejects(bad):
    with pytest.raises(ValueError):
        beta_of_alpha(bad)


@given(st.floats(min_value=1e-6, max_value=1e6).filter(lambda a: abs(a - 1.0) > 1e-9))
def test_beta_sign_split(alpha):
    beta = beta_of_alpha(alpha)
    if alpha > 1.0:
        assert beta > 1.0
    else:
        assert beta < 0.0


def test_alpha_loss_validates():
    assert AlphaLoss(4.0).beta == pytest.approx(4.0 / 3.0)
    with pytest.raises(ValueError):
        AlphaLoss(1.0)


def test_log_relative_checks_reference():
    LogRelativeLoss(reference=[0.25, 0.75])
    with pytest.raises(ValueError):
        LogRelativeLoss(reference=[0.5, 0.6])
    with pytest.raises(ValueError):
        LogRelativeLoss(reference=[1.0, 0.0])


def test_dataset_validation():
    d = Dataset(instances=[[0.0], [1.0]], labels=[1, 2], num_classes=2)
    assert d.n == 2 and d.dim == 1
    with pytest.raises(ValueError):
        Dataset(instances=[[0.0]], labels=[3], num_classes=2)
    with pytest.raises(ValueError):
        Dataset(instances=[[np.nan]], labels=[1], num_classes=2)
    with pytest.raises(ValueError):
        Dataset(instances=[[0.0]], labels=[1], num_classes=1)


def test_dataset_immutable():
    d = Dataset(instances=[[0.0], [1.0]], labels=[1, 2], num_classes=2)
    with pytest.raises(ValueError):
        d.instances[0, 0] = 5.0


def test_feature_map_dimensions():
    fm = FeatureMap(num_classes=3, thresholds=((1, 0.5), (2, -1.0)))
    assert fm.block_size == 3
    assert fm.dim == 9


def test_feature_vector_block_placement():
    fm = FeatureMap(num_classes=2, thresholds=((1, 0.5), (2, -1.0)))
    v1 = fm.vector([0.3, 0.0], 1)
    assert v1.tolist() == [1, 1, 0, 0, 0, 0]
    v2 = fm.vector([0.3, 0.0], 2)
    assert v2.tolist() == [0, 0, 0, 1, 1, 0]


def test_feature_vector_all_indicators_fire():
    fm = FeatureMap(num_classes=2, thresholds=((1, 0.5), (2, -1.0)))
    v = fm.vector([-10.0, -10.0], 1)
    assert v.tolist() == [1, 1, 1, 0, 0, 0]


def test_feature_vector_dim_mismatch_is_error():
    fm = FeatureMap(num_classes=2, thresholds=((2, 0.5),))
    with pytest.raises(ValueError):
        fm.vector([0.1], 1)
    with pytest.raises(ValueError):
        fm.vector([0.1, 0.2], 3)


@given(
    st.integers(min_value=2, max_value=4),
    st.integers(min_value=0, max_value=4),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_feature_vector_block_structure_property(k_classes, n_th, seed):
    rng = np.random.default_rng(seed)
    fm = FeatureMap(
        num_classes=k_classes,
        thresholds=tuple((1, float(t)) for t in sorted(rng.normal(size=n_th))),
    )
    x = rng.normal(size=1)
    for y in range(1, k_classes + 1):
        v = fm.vector(x, y)
        blk = v.reshape(k_classes, fm.block_size)
        fired = int(blk[y - 1].sum())
        assert blk[y - 1][0] == 1.0
        assert fired == 1 + int((x[0] <= np.array([t for _, t in fm.thresholds])).sum())
        off_block = np.delete(blk, y - 1, axis=0)
        assert not off_block.any()


def test_expectation_box_roundtrip():
    box = ExpectationBox.from_mean([1.0, 0.0], [0.25, 0.25], 4)
    np.testing.assert_allclose(box.lower, [0.875, -0.125])
    np.testing.assert_allclose(box.upper, [1.125, 0.125])
    np.testing.assert_allclose(box.half_width, [0.125, 0.125])


def test_expectation_box_rejects_negative_widths():
    with pytest.raises(ValueError):
        ExpectationBox.from_mean([0.5], [-0.1], 4)


def test_expectation_box_rejects_inconsistent_endpoints():
    with pytest.raises(ValueError):
        ExpectationBox(
            mean=np.array([0.5]),
            widths=np.array([0.1]),
            lower=np.array([0.3]),
            upper=np.array([0.55]),
            n=4,
        )


def test_constraint_atoms_scores():
    atoms = ConstraintAtoms(patterns=np.array([[1.0, 0.0], [1.0, 1.0]]), num_classes=2)
    w = np.array([1.0, 2.0, 3.0, 4.0])
    s = atoms.scores(w)
    assert s.shape == (2, 2)
    assert s[0].tolist() == [1.0, 3.0]
    assert s[1].tolist() == [3.0, 7.0]
    np.testing.assert_allclose(atoms.group(1) @ w, s[1])


def test_constraint_atoms_validation():
    with pytest.raises(ValueError):
        ConstraintAtoms(patterns=np.array([[0.0, 1.0]]), num_classes=2)
    with pytest.raises(ValueError):
        ConstraintAtoms(patterns=np.array([[1.0, 0.5]]), num_classes=2)


def test_model_variant_offset_coupling():
    fm = FeatureMap(num_classes=2, thresholds=())
    MrcModel(
        loss=ZeroOneLoss(), weights=np.zeros(2), offset=-0.5,
        objective_value=0.5, num_classes=2, feature_map=fm,
    )
    with pytest.raises(ValueError):
        MrcModel(
            loss=ZeroOneLoss(), weights=np.zeros(2), offset=None,
            objective_value=0.5, num_classes=2, feature_map=fm,
        )
    with pytest.raises(ValueError):
        MrcModel(
            loss=ZeroOneLoss(), weights=np.zeros(2), offset=-0.5,
            objective_value=0.5, num_classes=2, feature_map=fm,
            variant="instance_marginal",
        )


def test_bound_report_orders_bounds():
    BoundReport(upper=0.5, lower=0.5)
    with pytest.raises(ValueError):
        BoundReport(upper=0.3, lower=0.5)
