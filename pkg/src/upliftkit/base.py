"""Common estimator contract: ``fit(X, y, treatment)`` then ``predict(X) -> tau_hat``."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_features

_REGISTRY = {}


def register(cls):
    _REGISTRY[cls.method] = cls
    return cls


def estimator_class(method: str):
    try:
        return _REGISTRY[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(_REGISTRY)}") from None


class UpliftEstimator(BaseEstimator):
    """Base class for individual-treatment-effect estimators.

    Subclasses implement ``_fit`` and ``_predict`` and set ``method``.
    ``predict`` returns one effect estimate per input row.
    """

    method = None

    def fit(self, X, y, treatment, sample_weight=None):
        raise NotImplementedError

    def fit_dataset(self, ds):
        self.fit(ds.features, ds.outcome, ds.treatment, sample_weight=ds.weights)
        self.feature_names_ = list(ds.feature_names)
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_features(X, self.n_features_in_)
        return self._predict(X)

    # predict_tau is the name used throughout the docs
    def predict_tau(self, X):
        return self.predict(X)

    def _predict(self, X):
        raise NotImplementedError

    def _names(self):
        return list(getattr(self, "feature_names_", [f"x{i + 1}" for i in range(self.n_features_in_)]))

    def to_dict(self) -> dict:
        check_is_fitted(self, "n_features_in_")
        return {
            "method": self.method,
            "params": _jsonable_params(self.get_params(deep=False)),
            "feature_names": self._names(),
            "state": self._state_dict(),
        }

    def _state_dict(self) -> dict:
        return {}

    @classmethod
    def from_dict(cls, d: dict):
        est = estimator_class(d["method"])(**d.get("params", {}))
        est.feature_names_ = list(d["feature_names"])
        est.n_features_in_ = len(est.feature_names_)
        est._load_state(d.get("state", {}))
        return est

    def _load_state(self, state: dict):
        pass


def _jsonable_params(params):
    out = {}
    for k, v in params.items():
        if callable(v):
            continue
        if isinstance(v, (np.integer, np.floating)):
            v = v.item()
        out[k] = v
    return out
