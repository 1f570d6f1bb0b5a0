"""Weighted least squares with optional ridge and classical standard errors."""

from dataclasses import dataclass
from typing import Optional

import numpy as np


class SingularDesignError(ValueError):
    """The normal equations have no unique solution."""


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Fitted ``target ~ b0 + b . x``; arrays are intercept-first (length K+1).

    ``standard_errors`` and ``t_statistics`` are NaN when ``n_fit <= K + 1``.
    """

    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_statistics: np.ndarray
    residual_variance: float
    n_fit: int
    ridge: float = 0.0

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.coefficients[1:]

    @property
    def has_standard_errors(self) -> bool:
        return bool(np.all(np.isfinite(self.standard_errors)))

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.coefficients[0] + X @ self.coefficients[1:]

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "standard_errors": [None if not np.isfinite(v) else float(v) for v in self.standard_errors],
            "residual_variance": None if not np.isfinite(self.residual_variance) else self.residual_variance,
            "n_fit": self.n_fit,
            "ridge": self.ridge,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        coef = np.asarray(d["coefficients"], dtype=float)
        se = np.array([np.nan if v is None else v for v in d["standard_errors"]], dtype=float)
        rv = d.get("residual_variance")
        return cls(coef, se, _t_stats(coef, se), np.nan if rv is None else float(rv),
                   int(d["n_fit"]), float(d.get("ridge", 0.0)))


def _t_stats(coef, se):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, coef / se, np.nan)


def fit_ols(features, target, weights: Optional[np.ndarray] = None, ridge: float = 0.0) -> LinearModel:
    """Minimize ``sum w_i (y_i - b0 - b.x_i)^2 + ridge * |b|^2``.

    The intercept is never penalized. With ``ridge == 0`` a rank-deficient
    design raises :class:`SingularDesignError`.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(target, dtype=float).ravel()
    n, k = X.shape
    if y.size != n:
        raise ValueError(f"target has {y.size} rows, features have {n}")
    if n == 0:
        raise ValueError("cannot fit on zero rows")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.size != n or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be n positive finite values")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")

    D = np.hstack([np.ones((n, 1)), X])
    p = k + 1
    sw = np.sqrt(w)
    Dw = D * sw[:, None]
    yw = y * sw
    if ridge > 0:
        pen = np.sqrt(ridge) * np.eye(p)[1:]
        A_sys = np.vstack([Dw, pen])
        b_sys = np.concatenate([yw, np.zeros(k)])
    else:
        A_sys, b_sys = Dw, yw
    coef, _, rank, sv = np.linalg.lstsq(A_sys, b_sys, rcond=None)
    tol = sv.max() * max(A_sys.shape) * np.finfo(float).eps if sv.size else 0.0
    if rank < p or (sv.size and sv.min() <= tol):
        raise SingularDesignError("singular design")

    resid = y - D @ coef
    if n > p:
        sigma2 = float(np.sum(w * resid**2) / (n - p))
        G = Dw.T @ Dw
        A = G + ridge * np.diag([0.0] + [1.0] * k)
        A_inv = np.linalg.inv(A)
        cov = sigma2 * (A_inv @ G @ A_inv)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    else:
        sigma2 = np.nan
        se = np.full(p, np.nan)
    return LinearModel(coef, se, _t_stats(coef, se), sigma2, n, float(ridge))
