import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from upliftkit.base import estimator_class
from upliftkit.dataset import Dataset, balance_weights
from upliftkit.estimators import (
    AllBaseline, BestBaseline, InteractionUplift, TianUplift, TransformedOutcomeUplift,
    TwoModelUplift, baseline_all, baseline_best, interaction_fit, tian_fit,
    transformed_outcome_fit, two_model_fit,
)
from upliftkit.synth import gen_law3, gen_law7, normal_cdf

from conftest import make_dataset

LINEAR = (TwoModelUplift, TransformedOutcomeUplift, TianUplift, InteractionUplift)


@pytest.fixture(scope="module")
def law3_big():
    return gen_law3(100_000, seed=0).dataset


def test_registry_names():
    assert estimator_class("tian") is TianUplift
    with pytest.raises(ValueError, match="unknown method"):
        estimator_class("nope")


def test_two_model_arm_fits(law3_big):
    est = two_model_fit(law3_big)
    m1, m0 = est.models_["treated"], est.models_["control"]
    np.testing.assert_allclose(m1.slopes, [1.0, 1.0], atol=0.05)
    np.testing.assert_allclose(m0.slopes, [0.0, 1.0], atol=0.05)


def test_two_model_exact():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((40, 2))
    t = np.repeat([1, 0], 20)
    y = np.where(t == 1, X[:, 0], 0.0)
    est = TwoModelUplift().fit(X, y, t)
    np.testing.assert_allclose(est.predict(X), X[:, 0], atol=1e-12)


def test_two_model_small_arm():
    X = np.arange(10.0).reshape(-1, 1)
    t = np.array([1] * 9 + [0])
    with pytest.raises(ValueError, match="each arm"):
        TwoModelUplift().fit(X, np.arange(10.0), t)


def test_transformed_recovers_effect(law3_big):
    est = transformed_outcome_fit(law3_big)
    np.testing.assert_allclose(est.scale_ * est.effect_coef_, [1.0, 0.0], atol=0.05)


def test_transformed_all_zero_outcomes():
    ds = make_dataset()
    ds = Dataset(ds.features, np.zeros(ds.n), ds.treatment)
    assert np.all(transformed_outcome_fit(ds).predict(ds.features) == 0)


def test_transformed_unbalanced_arms_is_unbiased():
    rng = np.random.default_rng(7)
    n = 200_000
    X = rng.standard_normal((n, 1))
    t = (rng.random(n) < 0.2).astype(float)
    y = 1.0 + 0.5 * X[:, 0] + t * (0.3 + X[:, 0]) + rng.standard_normal(n)
    est = TransformedOutcomeUplift().fit(X, y, t)
    assert est.scale_ * est.effect_intercept_ == pytest.approx(0.3, abs=0.05)
    assert est.scale_ * est.effect_coef_[0] == pytest.approx(1.0, abs=0.05)


def test_tian_recovers_effect(law3_big):
    est = tian_fit(law3_big)
    np.testing.assert_allclose(2 * est.effect_coef_, [1.0, 0.0], atol=0.05)
    assert est.effect_intercept_ == 0.0


def test_tian_six_rows(six):
    est = tian_fit(six)
    assert np.all(np.isfinite(est.effect_coef_))
    assert np.all(np.isfinite(est.predict(six.features)))


def test_tian_all_zero_outcomes():
    ds = make_dataset()
    ds = Dataset(ds.features, np.zeros(ds.n), ds.treatment)
    assert np.all(tian_fit(ds).predict(ds.features) == 0)


def test_tian_ignores_intercept_in_effect():
    ds = make_dataset(n=400)
    shifted = Dataset(ds.features, ds.outcome + 10.0, ds.treatment)
    np.testing.assert_allclose(tian_fit(ds).predict(ds.features),
                               tian_fit(shifted).predict(ds.features), atol=1e-9)


def test_interaction_recovers_effect(law3_big):
    est = interaction_fit(law3_big)
    assert est.effect_intercept_ == pytest.approx(0.0, abs=0.05)
    np.testing.assert_allclose(est.effect_coef_, [1.0, 0.0], atol=0.05)
    m = est.models_["interaction"]
    np.testing.assert_allclose(m.slopes[:2], [0.0, 1.0], atol=0.05)


def test_interaction_at_zero_is_beta_t():
    est = interaction_fit(make_dataset())
    assert est.predict(np.zeros((1, 2)))[0] == est.models_["interaction"].slopes[2]


def test_interaction_null_data():
    rng = np.random.default_rng(11)
    n = 50_000
    X = rng.standard_normal((n, 2))
    est = InteractionUplift().fit(X, rng.standard_normal(n), rng.integers(0, 2, n))
    assert np.abs(est.predict(X)).mean() < 0.05


def test_interaction_too_few_rows():
    with pytest.raises(ValueError, match="more than 6 rows"):
        InteractionUplift().fit(np.zeros((6, 2)), np.zeros(6), [1, 0, 1, 0, 1, 0])


def test_interaction_equals_two_model_unweighted():
    ds = make_dataset(n=300, k=3, seed=5)
    np.testing.assert_allclose(interaction_fit(ds).predict(ds.features),
                               two_model_fit(ds).predict(ds.features), atol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_tau_mse_on_linear_law(seed):
    ds = gen_law3(100_000, seed=seed).dataset
    for fit in (tian_fit, interaction_fit):
        tau = fit(ds).predict(ds.features)
        assert np.mean((tau - ds.features[:, 0]) ** 2) < 0.01


def test_baselines():
    X = np.array([[0.0, 0.0, 1.0], [-1.0, 5.0, 0.0], [2.0, 0.0, 1.0]])
    assert np.all(baseline_all().fit(X).predict(X) > 0)
    best = baseline_best("law7").fit(X)
    tau = best.predict(X)
    assert tau[0] == pytest.approx(0.34134, abs=1e-5)
    assert tau[1] == 0.0
    assert tau[2] == pytest.approx(normal_cdf(3.0) - normal_cdf(2.0))


def test_best_accepts_callable():
    X = np.arange(6.0).reshape(3, 2)
    assert BestBaseline(lambda X: X[:, 1]).fit(X).predict(X).tolist() == [1, 3, 5]


def test_predict_before_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        TianUplift().predict(np.zeros((1, 2)))


@pytest.mark.parametrize("cls", LINEAR + (AllBaseline,))
def test_predict_length_and_feature_check(cls):
    ds = make_dataset(n=120, k=2)
    est = cls().fit(ds.features, ds.outcome, ds.treatment)
    assert est.predict(np.zeros((7, 2))).shape == (7,)
    with pytest.raises(ValueError, match="feature count mismatch"):
        est.predict(np.zeros((3, 3)))


@pytest.mark.parametrize("cls", LINEAR)
def test_sklearn_params(cls):
    est = cls(ridge=0.5)
    assert est.get_params()["ridge"] == 0.5
    assert clone(est).get_params() == est.get_params()


def test_weighted_fit_matches_balance_weights():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((90, 2))
    t = (np.arange(90) < 30).astype(float)
    y = X[:, 0] * t + rng.standard_normal(90)
    ds = balance_weights(Dataset(X, y, t))
    a = TianUplift(balance_arms=False).fit(X, y, t, ds.weights).predict(X)
    b = TianUplift().fit(X, y, t).predict(X)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_duplicate_feature_with_ridge_is_stable():
    ds = make_dataset(n=500, k=2, seed=9)
    X2 = np.column_stack([ds.features, ds.features[:, 0]])
    for cls in LINEAR:
        a = cls(ridge=1e-8).fit(ds.features, ds.outcome, ds.treatment).predict(ds.features)
        b = cls(ridge=1e-8).fit(X2, ds.outcome, ds.treatment).predict(X2)
        np.testing.assert_allclose(a, b, atol=1e-6)


small_data = st.integers(0, 10_000).map(lambda s: make_dataset(n=40, k=2, seed=s))


@settings(max_examples=25, deadline=None)
@given(ds=small_data)
def test_relabeling_arms_negates(ds):
    flipped = Dataset(ds.features, ds.outcome, 1 - ds.treatment)
    for cls in (TwoModelUplift, TransformedOutcomeUplift, TianUplift):
        a = cls().fit_dataset(ds).predict(ds.features)
        b = cls().fit_dataset(flipped).predict(ds.features)
        np.testing.assert_allclose(a, -b, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(ds=small_data, m=st.integers(1, 30))
def test_predictions_finite_and_sized(ds, m):
    Xn = np.random.default_rng(m).standard_normal((m, 2))
    for cls in LINEAR:
        out = cls().fit_dataset(ds).predict(Xn)
        assert out.shape == (m,) and np.all(np.isfinite(out))


def test_law7_fit_smoke():
    ds = gen_law7(6000, seed=0).dataset
    for cls in LINEAR:
        assert np.all(np.isfinite(cls().fit_dataset(ds).predict(ds.features)))
