"""Seeded generators for the synthetic laws, with closed-form effect oracles.

All generators use ``numpy.random.default_rng(seed)`` (PCG64). Latent noise
and, for law 7, the latent index ``Y*`` are kept on the returned sample but
are not part of the :class:`~upliftkit.dataset.Dataset`.

=====  ===========================================================  =================
law    outcome                                                      true effect
=====  ===========================================================  =================
law3   ``y = t x1 + x2 + e``, ``e ~ N(0, 1)``                       ``x1``
law4   ``y = x1/2 + x2 + (2t - 1) x1 / 4 + e``, ``e ~ N(0, 0.1)``   ``x1 / 2``
law7   ``y = 1[x1 + x3 t + e >= 0]``, ``x3 ~ Bernoulli(0.6)``       ``Phi(x1 + x3) - Phi(x1)``
null   ``y = x2 + e``                                               ``0``
=====  ===========================================================  =================
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy.special import ndtr

from .dataset import Dataset

LAW7_DEFAULT_N = 6000
LAW4_NOISE_SD = 0.1


def normal_cdf(x):
    """Standard normal CDF (scalar in, float out; arrays in, arrays out)."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class GeneratedSample:
    dataset: Dataset
    true_tau: np.ndarray
    law: str
    latent: Dict[str, np.ndarray] = field(default_factory=dict)


def law3_outcome(t, x1, x2, eps):
    return t * x1 + x2 + eps


def law4_outcome(t, x1, x2, eps):
    return 0.5 * x1 + x2 + 0.5 * (2 * t - 1) * 0.5 * x1 + eps


def law7_latent(t, x1, x3, eps):
    return x1 + x3 * t + eps


def law7_outcome(t, x1, x3, eps):
    return (law7_latent(t, x1, x3, eps) >= 0).astype(float)


def law7_true_tau(x1, x3):
    x1 = np.asarray(x1, dtype=float)
    return normal_cdf(x1 + np.asarray(x3, dtype=float)) - normal_cdf(x1)


def true_tau_for(law: str, X) -> np.ndarray:
    """Closed-form effect of ``law`` evaluated at feature rows ``X``."""
    X = np.asarray(X, dtype=float)
    if law == "law3":
        return X[:, 0].copy()
    if law == "law4":
        return 0.5 * X[:, 0]
    if law == "law7":
        return law7_true_tau(X[:, 0], X[:, 2])
    if law == "null":
        return np.zeros(X.shape[0])
    raise ValueError(f"unknown law {law!r}")


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _treatment(rng, n):
    return (rng.random(n) < 0.5).astype(float)


def gen_law3(n: int, seed: int = 0) -> GeneratedSample:
    n = _check_n(n)
    rng = np.random.default_rng(seed)
    x1, x2, eps = rng.standard_normal((3, n))
    t = _treatment(rng, n)
    y = law3_outcome(t, x1, x2, eps)
    ds = Dataset(np.column_stack([x1, x2]), y, t, ["x1", "x2"])
    return GeneratedSample(ds, x1.copy(), "law3", {"eps": eps})


def gen_law4(n: int, seed: int = 0) -> GeneratedSample:
    n = _check_n(n)
    rng = np.random.default_rng(seed)
    x1, x2 = rng.standard_normal((2, n))
    eps = LAW4_NOISE_SD * rng.standard_normal(n)
    t = _treatment(rng, n)
    y = law4_outcome(t, x1, x2, eps)
    ds = Dataset(np.column_stack([x1, x2]), y, t, ["x1", "x2"])
    return GeneratedSample(ds, 0.5 * x1, "law4", {"eps": eps})


def gen_law7(n: int = LAW7_DEFAULT_N, seed: int = 0) -> GeneratedSample:
    n = _check_n(n)
    rng = np.random.default_rng(seed)
    x1, x2, eps = rng.standard_normal((3, n))
    x3 = (rng.random(n) < 0.6).astype(float)
    t = _treatment(rng, n)
    y_star = law7_latent(t, x1, x3, eps)
    y = (y_star >= 0).astype(float)
    ds = Dataset(np.column_stack([x1, x2, x3]), y, t, ["x1", "x2", "x3"])
    return GeneratedSample(ds, law7_true_tau(x1, x3), "law7", {"eps": eps, "y_star": y_star})


def gen_null(n: int, seed: int = 0) -> GeneratedSample:
    """Law 3 with the ``t * x1`` term removed: no effect anywhere."""
    n = _check_n(n)
    rng = np.random.default_rng(seed)
    x1, x2, eps = rng.standard_normal((3, n))
    t = _treatment(rng, n)
    ds = Dataset(np.column_stack([x1, x2]), x2 + eps, t, ["x1", "x2"])
    return GeneratedSample(ds, np.zeros(n), "null", {"eps": eps})


GENERATORS = {"law3": gen_law3, "law4": gen_law4, "law7": gen_law7, "null": gen_null}


def generate(law: str, n: int, seed: int = 0) -> GeneratedSample:
    key = law if law in GENERATORS else f"law{law}"
    if key not in GENERATORS:
        raise ValueError(f"unknown law {law!r}; choose from 3, 4, 7, null")
    return GENERATORS[key](n, seed)
