"""Uplift (individual treatment effect) estimation for randomized experiments."""

from .base import UpliftEstimator
from .dataset import Dataset, SplitPair, balance_weights, load_csv, split_train_test, write_csv
from .estimators import (
    AllBaseline,
    BestBaseline,
    InteractionUplift,
    TianUplift,
    TransformedOutcomeUplift,
    TwoModelUplift,
)
from .evaluation import qini_curve, qini_index, rank_by_tau, top_alpha_effect, validation_regression
from .forest import ForestConfig, UpliftForest, build_forest
from .persistence import load_model, save_model
from .tree import TreeConfig, UpliftTree, build_tree, extract_rules

__version__ = "0.1.0"

__all__ = [
    "AllBaseline", "BestBaseline", "Dataset", "ForestConfig", "InteractionUplift", "SplitPair",
    "TianUplift", "TransformedOutcomeUplift", "TreeConfig", "TwoModelUplift", "UpliftEstimator",
    "UpliftForest", "UpliftTree", "balance_weights", "build_forest", "build_tree", "extract_rules",
    "load_csv", "load_model", "qini_curve", "qini_index", "rank_by_tau", "save_model",
    "split_train_test", "top_alpha_effect", "validation_regression", "write_csv",
]
