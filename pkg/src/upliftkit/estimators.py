"""Regression-reduction uplift estimators and the two synthetic baselines.

Every linear estimator here ends up with an effect model of the form
``tau_hat(x) = scale_ * (effect_intercept_ + effect_coef_ . x)``, which is
what gets serialized.
"""

import numpy as np

from ._validation import arm_counts, check_uplift_data
from .base import UpliftEstimator, register
from .linear import LinearModel, fit_ols


class LinearUpliftEstimator(UpliftEstimator):
    """Shared predict/serialization for estimators with a linear effect model."""

    def __init__(self, ridge=0.0):
        self.ridge = ridge

    def _predict(self, X):
        return self.scale_ * (self.effect_intercept_ + X @ self.effect_coef_)

    def _set_effect(self, intercept, coef, scale):
        self.effect_intercept_ = float(intercept)
        self.effect_coef_ = np.asarray(coef, dtype=float).copy()
        self.scale_ = float(scale)

    def _state_dict(self):
        return {
            "effect_intercept": self.effect_intercept_,
            "coefficients": self.effect_coef_.tolist(),
            "scale": self.scale_,
            "models": {k: m.to_dict() for k, m in self.models_.items()},
        }

    def _load_state(self, state):
        self._set_effect(state["effect_intercept"], state["coefficients"], state["scale"])
        self.models_ = {k: LinearModel.from_dict(m) for k, m in state.get("models", {}).items()}


def _require_arms(t, minimum=1, what="each arm"):
    n_t, n_c = arm_counts(t)
    if n_t < minimum or n_c < minimum:
        raise ValueError(
            f"{what} needs at least {minimum} rows (treated={n_t}, control={n_c})"
        )
    return n_t, n_c


@register
class TwoModelUplift(LinearUpliftEstimator):
    """Separate outcome regressions per arm; effect is their difference."""

    method = "two_model"

    def fit(self, X, y, treatment, sample_weight=None):
        X, y, t, w = check_uplift_data(X, y, treatment, sample_weight)
        k = X.shape[1]
        _require_arms(t, k + 2, "two-model fit: each arm")
        treated, control = t == 1, t == 0
        m1 = fit_ols(X[treated], y[treated], w[treated], self.ridge)
        m0 = fit_ols(X[control], y[control], w[control], self.ridge)
        self.models_ = {"treated": m1, "control": m0}
        self._set_effect(m1.intercept - m0.intercept, m1.slopes - m0.slopes, 1.0)
        self.n_features_in_ = k
        return self


@register
class TransformedOutcomeUplift(LinearUpliftEstimator):
    """Single regression on the signed outcome ``y (2t - 1)``.

    Rows are rescaled by ``1 / (2 p)`` (treated) or ``1 / (2 (1 - p))``
    (control), with ``p`` the weighted treated share, so that the fitted
    mean times 2 is unbiased for the effect. At ``p = 0.5`` the target is
    exactly the raw signed outcome.
    """

    method = "transformed"

    def fit(self, X, y, treatment, sample_weight=None):
        X, y, t, w = check_uplift_data(X, y, treatment, sample_weight)
        _require_arms(t)
        p = float(np.sum(w[t == 1]) / np.sum(w))
        z = y * (2.0 * t - 1.0)
        target = z * np.where(t == 1, 0.5 / p, 0.5 / (1.0 - p))
        m = fit_ols(X, target, w, self.ridge)
        self.treated_share_ = p
        self.models_ = {"signed_outcome": m}
        self._set_effect(m.intercept, m.slopes, 2.0)
        self.n_features_in_ = X.shape[1]
        return self


@register
class TianUplift(LinearUpliftEstimator):
    """Regress ``y`` on ``(2t - 1) x`` with an intercept.

    The effect is ``2 * alpha . x`` on the *untransformed* features; the
    intercept only absorbs the outcome mean. ``balance_arms`` reweights the
    arms to equal total weight before fitting.
    """

    method = "tian"

    def __init__(self, ridge=0.0, balance_arms=True):
        self.ridge = ridge
        self.balance_arms = balance_arms

    def fit(self, X, y, treatment, sample_weight=None):
        X, y, t, w = check_uplift_data(X, y, treatment, sample_weight)
        n_t, n_c = _require_arms(t)
        if self.balance_arms:
            w = w * np.where(t == 1, t.size / (2.0 * n_t), t.size / (2.0 * n_c))
        m = fit_ols(X * (2.0 * t - 1.0)[:, None], y, w, self.ridge)
        self.models_ = {"covariate_transform": m}
        self._set_effect(0.0, m.slopes, 2.0)
        self.n_features_in_ = X.shape[1]
        return self


@register
class InteractionUplift(LinearUpliftEstimator):
    """Regression on ``(x, t, t x)``; effect is ``beta_t + beta_tx . x``."""

    method = "interaction"

    def fit(self, X, y, treatment, sample_weight=None):
        X, y, t, w = check_uplift_data(X, y, treatment, sample_weight)
        n, k = X.shape
        if n <= 2 * k + 2:
            raise ValueError(f"interaction fit needs more than {2 * k + 2} rows, got {n}")
        _require_arms(t)
        design = np.hstack([X, t[:, None], t[:, None] * X])
        m = fit_ols(design, y, w, self.ridge)
        slopes = m.slopes
        self.models_ = {"interaction": m}
        self._set_effect(slopes[k], slopes[k + 1:], 1.0)
        self.n_features_in_ = k
        return self


@register
class AllBaseline(UpliftEstimator):
    """Selects everyone: predicts +1 for every row."""

    method = "all"

    def fit(self, X, y=None, treatment=None, sample_weight=None):
        self.n_features_in_ = np.asarray(X).reshape(len(X), -1).shape[1]
        return self

    def _predict(self, X):
        return np.ones(X.shape[0])


@register
class BestBaseline(UpliftEstimator):
    """Oracle that predicts the true effect of a known synthetic law.

    ``true_tau`` is either a callable ``X -> tau`` or the name of a law in
    :mod:`upliftkit.synth` (``"law3"``, ``"law4"``, ``"law7"``, ``"null"``).
    """

    method = "best"

    def __init__(self, true_tau="law7"):
        self.true_tau = true_tau

    def fit(self, X, y=None, treatment=None, sample_weight=None):
        self.n_features_in_ = np.asarray(X).reshape(len(X), -1).shape[1]
        return self

    def _predict(self, X):
        if callable(self.true_tau):
            return np.asarray(self.true_tau(X), dtype=float)
        from .synth import true_tau_for

        return true_tau_for(self.true_tau, X)


def two_model_fit(ds, ridge=0.0):
    return TwoModelUplift(ridge=ridge).fit_dataset(ds)


def transformed_outcome_fit(ds, ridge=0.0):
    return TransformedOutcomeUplift(ridge=ridge).fit_dataset(ds)


def tian_fit(ds, ridge=0.0, balance_arms=True):
    return TianUplift(ridge=ridge, balance_arms=balance_arms).fit_dataset(ds)


def interaction_fit(ds, ridge=0.0):
    return InteractionUplift(ridge=ridge).fit_dataset(ds)


def baseline_all():
    return AllBaseline()


def baseline_best(true_tau):
    return BestBaseline(true_tau)
