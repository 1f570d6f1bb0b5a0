"""Data transformations that turn uplift estimation into plain regression.

Each function takes a :class:`~upliftkit.dataset.Dataset` and returns a
:class:`TransformedDataset` with the treatment column folded into the
outcome or the features.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from ._validation import is_binary
from .dataset import Dataset


@dataclass(frozen=True, eq=False)
class TransformedDataset:
    features: np.ndarray
    feature_names: Tuple[str, ...]
    outcome: np.ndarray
    weights: np.ndarray
    transform: str
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.features.shape[0]


def _sign(ds):
    return 2.0 * ds.treatment - 1.0


def signed_outcome(ds: Dataset) -> TransformedDataset:
    """Replace the outcome with ``y * (2t - 1)``.

    The value is stored unscaled; with balanced arms ``E[z | x]`` is half the
    effect, and estimators apply the factor themselves.
    """
    z = ds.outcome * _sign(ds)
    return TransformedDataset(ds.features, ds.feature_names, z, ds.weights, "signed_outcome")


def class_transform(ds: Dataset) -> TransformedDataset:
    """Binary-outcome relabeling ``z = y t + (1 - y)(1 - t)``."""
    if not is_binary(ds.outcome):
        raise ValueError("class_transform requires outcomes in {0, 1}")
    y, t = ds.outcome, ds.treatment
    z = y * t + (1.0 - y) * (1.0 - t)
    return TransformedDataset(ds.features, ds.feature_names, z, ds.weights, "class_transform")


def covariate_transform(ds: Dataset) -> TransformedDataset:
    """Multiply every feature by ``2t - 1`` (outcome unchanged)."""
    X = ds.features * _sign(ds)[:, None]
    names = tuple(f"{name}*" for name in ds.feature_names)
    return TransformedDataset(X, names, ds.outcome.copy(), ds.weights, "covariate_transform")


def interaction_augment(ds: Dataset) -> TransformedDataset:
    """Feature block ``(x_1..x_K, t, t*x_1..t*x_K)``."""
    t = ds.treatment[:, None]
    X = np.hstack([ds.features, t, t * ds.features])
    names = (*ds.feature_names, "t", *(f"t*{name}" for name in ds.feature_names))
    return TransformedDataset(X, names, ds.outcome.copy(), ds.weights, "interaction_augment")
