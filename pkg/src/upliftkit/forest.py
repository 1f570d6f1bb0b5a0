"""Bagged ensemble of uplift trees with per-tree row and feature subsampling."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from ._validation import check_uplift_data
from .base import UpliftEstimator, register
from .tree import TreeConfig, UpliftTree

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 10


def _tree_rng(seed, index, attempt):
    # keyed on (seed, tree index, attempt) so results do not depend on build order
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), int(attempt)]))


def _build_one(X, y, t, params, index, seed, n_rows, n_feats, with_replacement):
    n, k = X.shape
    for attempt in range(MAX_ATTEMPTS):
        rng = _tree_rng(seed, index, attempt)
        rows = rng.choice(n, size=n_rows, replace=with_replacement)
        feats = np.sort(rng.choice(k, size=n_feats, replace=False))
        tree = UpliftTree(**params, seed=int(rng.integers(2**31)))
        try:
            tree.fit(X[np.ix_(rows, feats)], y[rows], t[rows])
        except ValueError:
            continue
        return feats, tree, attempt + 1
    return None, None, MAX_ATTEMPTS


@register
class UpliftForest(UpliftEstimator):
    """Average of :class:`~upliftkit.tree.UpliftTree` predictions.

    Each tree sees its own random rows (bootstrap by default) and its own
    random feature subset of size ``max(1, round(feature_fraction * K))``.
    A tree whose subsample cannot satisfy the leaf-size constraints is
    retried with a fresh sub-seed up to 10 times, then skipped.
    """

    method = "forest"

    def __init__(self, n_trees=100, row_fraction=1.0, feature_fraction=1 / 3, with_replacement=True,
                 seed=0, criterion="divergence_euclid", outcome_threshold=None, min_leaf_per_arm=50,
                 max_depth=4, honest=False, laplace=True, n_jobs=None):
        self.n_trees = n_trees
        self.row_fraction = row_fraction
        self.feature_fraction = feature_fraction
        self.with_replacement = with_replacement
        self.seed = seed
        self.criterion = criterion
        self.outcome_threshold = outcome_threshold
        self.min_leaf_per_arm = min_leaf_per_arm
        self.max_depth = max_depth
        self.honest = honest
        self.laplace = laplace
        self.n_jobs = n_jobs

    def _tree_params(self):
        return dict(criterion=self.criterion, outcome_threshold=self.outcome_threshold,
                    min_leaf_per_arm=self.min_leaf_per_arm, max_depth=self.max_depth,
                    honest=self.honest, laplace=self.laplace)

    def fit(self, X, y, treatment, sample_weight=None):
        X, y, t, _ = check_uplift_data(X, y, treatment, sample_weight)
        n, k = X.shape
        if int(self.n_trees) < 1:
            raise ValueError("n_trees must be >= 1")
        for name in ("row_fraction", "feature_fraction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        n_rows = max(1, int(math.floor(self.row_fraction * n + 0.5)))
        n_feats = max(1, int(math.floor(self.feature_fraction * k + 0.5)))

        params = self._tree_params()
        results = Parallel(n_jobs=self.n_jobs)(
            delayed(_build_one)(X, y, t, params, i, self.seed, n_rows, n_feats, self.with_replacement)
            for i in range(int(self.n_trees))
        )
        self.trees_ = [tr for _, tr, _ in results if tr is not None]
        self.tree_features_ = [f for f, tr, _ in results if tr is not None]
        self.n_skipped_ = sum(1 for _, tr, _ in results if tr is None)
        self.n_retries_ = sum(a - 1 for _, tr, a in results if tr is not None)
        if not self.trees_:
            raise ValueError(f"all {self.n_trees} trees failed to build on their subsamples")
        if self.n_skipped_:
            logger.warning("forest skipped %d of %d trees", self.n_skipped_, self.n_trees)
        self.n_features_in_ = k
        return self

    def _predict(self, X):
        preds = np.zeros(X.shape[0])
        for feats, tree in zip(self.tree_features_, self.trees_):
            preds += tree._predict(X[:, feats])
        return preds / len(self.trees_)

    def _state_dict(self):
        return {
            "n_skipped": self.n_skipped_,
            "trees": [
                {"features": f.tolist(), "tree": tr.to_dict()}
                for f, tr in zip(self.tree_features_, self.trees_)
            ],
        }

    def _load_state(self, state):
        self.n_skipped_ = int(state.get("n_skipped", 0))
        self.tree_features_ = [np.asarray(d["features"], dtype=int) for d in state["trees"]]
        self.trees_ = [UpliftTree.from_dict(d["tree"]) for d in state["trees"]]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    row_fraction: float = 1.0
    feature_fraction: float = 1 / 3
    with_replacement: bool = True
    seed: int = 0
    tree: TreeConfig = TreeConfig()


def build_forest(ds, config: ForestConfig = ForestConfig(), n_jobs=None) -> UpliftForest:
    tc = config.tree
    forest = UpliftForest(
        n_trees=config.n_trees, row_fraction=config.row_fraction,
        feature_fraction=config.feature_fraction, with_replacement=config.with_replacement,
        seed=config.seed, criterion=tc.criterion, outcome_threshold=tc.outcome_threshold,
        min_leaf_per_arm=tc.min_leaf_per_arm, max_depth=tc.max_depth, honest=tc.honest,
        laplace=tc.laplace, n_jobs=n_jobs,
    )
    return forest.fit_dataset(ds)
