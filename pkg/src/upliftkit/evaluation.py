"""Ranking-based evaluation of effect predictions on held-out data.

Predictions only matter through the order they induce: rows are sorted by
decreasing predicted effect (ties by original index), the top ``alpha``
share is selected, and the treated-minus-control mean difference on that
prefix is compared with the full-sample difference.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_treatment
from .linear import SingularDesignError, fit_ols

DEFAULT_GRID = np.linspace(0.0, 1.0, 21)


class UndefinedEffectError(ValueError):
    """The selected rows do not contain both arms."""


@dataclass(frozen=True)
class EffectEstimate:
    effect: float
    stderr: float
    t_statistic: float
    n_treated: int
    n_control: int
    mean_treated: float
    mean_control: float

    @property
    def n(self) -> int:
        return self.n_treated + self.n_control


def welch_effect(outcome, treatment) -> EffectEstimate:
    """Difference in arm means with an unequal-variance standard error."""
    y = np.asarray(outcome, dtype=float)
    t = np.asarray(treatment)
    y1, y0 = y[t == 1], y[t == 0]
    if y1.size == 0 or y0.size == 0:
        raise UndefinedEffectError(
            f"undefined effect: treated={y1.size}, control={y0.size}"
        )
    m1, m0 = float(y1.mean()), float(y0.mean())
    effect = m1 - m0
    if y1.size > 1 and y0.size > 1:
        se = math.sqrt(np.var(y1, ddof=1) / y1.size + np.var(y0, ddof=1) / y0.size)
    else:
        se = math.nan
    ts = effect / se if se > 0 else math.nan
    return EffectEstimate(effect, se, ts, int(y1.size), int(y0.size), m1, m0)


def rank_by_tau(preds) -> np.ndarray:
    """Row indices by decreasing prediction; ties keep ascending index."""
    p = np.asarray(preds, dtype=float).ravel()
    if not np.all(np.isfinite(p)):
        raise ValueError("predictions must be finite")
    return np.lexsort((np.arange(p.size), -p))


def prefix_size(alpha: float, n: int) -> int:
    """``round(alpha * n)`` (halves round up), at least 1."""
    return max(1, int(math.floor(alpha * n + 0.5)))


def _prepare(outcome, treatment, preds):
    y = np.asarray(outcome, dtype=float).ravel()
    t = check_treatment(treatment)
    p = np.asarray(preds, dtype=float).ravel()
    if not (y.size == t.size == p.size):
        raise ValueError("outcome, treatment and predictions differ in length")
    if y.size == 0:
        raise ValueError("no rows to evaluate")
    order = rank_by_tau(p)
    return y[order], t[order]


def top_alpha_effect(outcome, treatment, preds, alpha: float) -> EffectEstimate:
    """Effect on the ``alpha`` share of rows with the largest predictions."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    y, t = _prepare(outcome, treatment, preds)
    k = prefix_size(alpha, y.size)
    try:
        return welch_effect(y[:k], t[:k])
    except UndefinedEffectError:
        raise UndefinedEffectError(f"undefined effect at this alpha ({alpha:g})") from None


@dataclass(frozen=True, eq=False)
class QiniCurve:
    """``qini(alpha) = alpha * (tau(alpha) - tau_rnd)``; NaN where undefined."""

    grid: np.ndarray
    tau_at_alpha: np.ndarray
    tau_rnd: float
    qini_values: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.qini_values)

    def rows(self):
        for a, tau, q in zip(self.grid, self.tau_at_alpha, self.qini_values):
            yield float(a), float(tau), float(q)


def qini_curve(outcome, treatment, preds, grid=None) -> QiniCurve:
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(grid < 0) or np.any(grid > 1) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing values in [0, 1]")
    y, t = _prepare(outcome, treatment, preds)
    n = y.size
    tau_rnd = welch_effect(y, t).effect
    taus = np.full(grid.size, np.nan)
    qini = np.full(grid.size, np.nan)
    for i, a in enumerate(grid):
        if a == 0:
            qini[i] = 0.0
            continue
        k = prefix_size(a, n)
        if k == n:
            taus[i], qini[i] = tau_rnd, 0.0
            continue
        try:
            taus[i] = welch_effect(y[:k], t[:k]).effect
        except UndefinedEffectError:
            continue
        qini[i] = a * (taus[i] - tau_rnd)
    if np.count_nonzero(np.isfinite(qini)) < 2:
        raise ValueError("fewer than 2 defined points on the Qini curve")
    return QiniCurve(grid.copy(), taus, float(tau_rnd), qini)


def qini_index(curve: QiniCurve) -> float:
    """Trapezoidal area under the defined part of the curve."""
    ok = curve.defined
    if np.count_nonzero(ok) < 2:
        raise ValueError("fewer than 2 defined points on the Qini curve")
    x, q = curve.grid[ok], curve.qini_values[ok]
    return float(np.sum(np.diff(x) * (q[1:] + q[:-1]) / 2.0))


@dataclass(frozen=True, eq=False)
class ValidationFit:
    """``y = a0 + a1 t + a2 tau_hat + a3 t tau_hat`` by OLS."""

    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_statistics: np.ndarray
    n: int

    NAMES = ("intercept", "treatment", "tau_hat", "treatment:tau_hat")

    @property
    def alpha_3_t(self) -> float:
        return float(self.t_statistics[3])

    def to_dict(self) -> dict:
        def clean(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "n": self.n,
            "terms": [
                {"name": name, "coefficient": clean(c), "stderr": clean(s), "t": clean(ts)}
                for name, c, s, ts in zip(self.NAMES, self.coefficients, self.standard_errors,
                                          self.t_statistics)
            ],
        }


def validation_regression(outcome, treatment, preds) -> ValidationFit:
    y = np.asarray(outcome, dtype=float).ravel()
    t = check_treatment(treatment)
    p = np.asarray(preds, dtype=float).ravel()
    if not (y.size == t.size == p.size):
        raise ValueError("outcome, treatment and predictions differ in length")
    if np.ptp(p) == 0:
        raise SingularDesignError("collinear design: predictions are constant")
    try:
        m = fit_ols(np.column_stack([t, p, t * p]), y)
    except SingularDesignError:
        raise SingularDesignError("collinear design") from None
    return ValidationFit(m.coefficients, m.standard_errors, m.t_statistics, int(y.size))
