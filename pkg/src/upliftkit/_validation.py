"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length


def check_treatment(treatment):
    """Return ``treatment`` as a float vector of exact 0/1 values."""
    t = np.asarray(treatment, dtype=float).ravel()
    if not np.all(np.isfinite(t)):
        raise ValueError("invalid treatment: non-finite value")
    bad = (t != 0.0) & (t != 1.0)
    if bad.any():
        raise ValueError(
            f"invalid treatment: values must be 0 or 1, got {t[bad][0]!r}"
        )
    return t


def check_uplift_data(X, y, treatment, sample_weight=None):
    """Validate a (features, outcome, treatment, weights) quadruple.

    Returns float arrays; ``sample_weight`` defaults to ones.
    """
    X = check_array(X, dtype=float, ensure_2d=True)
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise ValueError("outcome contains non-finite values")
    t = check_treatment(treatment)
    if sample_weight is None:
        w = np.ones(X.shape[0])
    else:
        w = np.asarray(sample_weight, dtype=float).ravel()
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("sample weights must be finite and positive")
    check_consistent_length(X, y, t, w)
    return X, y, t, w


def check_features(X, n_features):
    """Validate a prediction matrix against the fitted feature count."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != n_features:
        raise ValueError(
            f"feature count mismatch: model expects {n_features}, got {X.shape[1]}"
        )
    return X


def arm_counts(treatment):
    t = np.asarray(treatment)
    n_t = int(np.count_nonzero(t == 1))
    return n_t, t.size - n_t


def is_binary(values):
    v = np.asarray(values)
    return bool(np.all((v == 0) | (v == 1)))
