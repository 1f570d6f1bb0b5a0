"""Randomized-trial samples: CSV ingestion, splitting and arm balancing."""

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ._validation import arm_counts, check_treatment


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """One randomized experiment: features, outcome, treatment and weights.

    Arrays are copied and made read-only on construction.
    """

    features: np.ndarray
    outcome: np.ndarray
    treatment: np.ndarray
    feature_names: Optional[Sequence[str]] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        n, k = X.shape
        if k < 1:
            raise ValueError("a dataset needs at least one feature")
        y = np.asarray(self.outcome, dtype=float).ravel()
        t = check_treatment(self.treatment)
        w = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if not (y.size == t.size == w.size == n):
            raise ValueError(
                f"column lengths differ: features {n}, outcome {y.size}, "
                f"treatment {t.size}, weights {w.size}"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and positive")
        names = (
            [f"x{i + 1}" for i in range(k)]
            if self.feature_names is None
            else [str(s) for s in self.feature_names]
        )
        if len(names) != k:
            raise ValueError(f"{len(names)} feature names for {k} features")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "outcome", _frozen(y))
        object.__setattr__(self, "treatment", _frozen(t))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "feature_names", tuple(names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            self.features[rows],
            self.outcome[rows],
            self.treatment[rows],
            self.feature_names,
            self.weights[rows],
        )

    def with_weights(self, weights) -> "Dataset":
        return Dataset(self.features, self.outcome, self.treatment, self.feature_names, weights)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.outcome, other.outcome)
            and np.array_equal(self.treatment, other.treatment)
            and np.array_equal(self.weights, other.weights)
        )


class SplitPair(NamedTuple):
    train: Dataset
    test: Dataset


def read_table(path):
    """Header and float matrix of a numeric CSV file with at least one data row."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate column names")
    values = np.empty((len(rows), len(header)))
    for r, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{r}: expected {len(header)} cells, got {len(row)}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}:{r}: non-numeric cell {cell!r} in column {header[c]!r}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}:{r}: non-finite cell in column {header[c]!r}")
            values[r - 2, c] = v
    return header, values


def load_csv(path, outcome_col: str = "y", treatment_col: str = "t") -> Dataset:
    """Read a header-first CSV file into a :class:`Dataset`.

    Every column other than ``outcome_col`` and ``treatment_col`` becomes a
    feature, in file order. Cells must all be numeric and finite.
    """
    header, values = read_table(path)
    for col in (outcome_col, treatment_col):
        if col not in header:
            raise ValueError(f"{path}: missing column {col!r}")
    feature_idx = [i for i, h in enumerate(header) if h not in (outcome_col, treatment_col)]
    if not feature_idx:
        raise ValueError(f"{path}: no feature columns")
    t = values[:, header.index(treatment_col)]
    bad = (t != 0) & (t != 1)
    if bad.any():
        raise ValueError(f"{path}: invalid treatment value {t[bad][0]!r}")
    return Dataset(
        values[:, feature_idx],
        values[:, header.index(outcome_col)],
        t,
        [header[i] for i in feature_idx],
    )


def _fmt(v: float) -> str:
    # repr round-trips doubles exactly; integral values print without ".0"
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def format_number(v: float) -> str:
    """Exact text form of a double; integral values print without ".0"."""
    return _fmt(float(v))


def csv_text(header, columns) -> str:
    """Render equal-length numeric columns as CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(float(v)) for v in row])
    return buf.getvalue()


def dataset_csv(ds: Dataset, outcome_col: str = "y", treatment_col: str = "t") -> str:
    """``ds`` as CSV text with columns ``outcome, treatment, features...`` (no weights)."""
    return csv_text([outcome_col, treatment_col, *ds.feature_names],
                    [ds.outcome, ds.treatment, *ds.features.T])


def write_csv(ds: Dataset, path, outcome_col: str = "y", treatment_col: str = "t") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(dataset_csv(ds, outcome_col, treatment_col))


def split_train_test(ds: Dataset, train_fraction: float = 0.8, seed: int = 0) -> SplitPair:
    """Uniformly random train/test partition with ``round(n * fraction)`` train rows."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = int(math.floor(ds.n * train_fraction + 0.5))
    if n_train < 1 or n_train > ds.n - 1:
        raise ValueError(
            f"train_fraction={train_fraction} leaves an empty part for n={ds.n}"
        )
    perm = np.random.default_rng(seed).permutation(ds.n)
    return SplitPair(ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:])))


def balance_weights(ds: Dataset) -> Dataset:
    """Reweight rows so both arms carry total weight ``n / 2``.

    Each row gets ``n / (2 * n_arm)`` for its own arm; incoming weights are
    replaced.
    """
    n_t, n_c = arm_counts(ds.treatment)
    if n_t == 0 or n_c == 0:
        raise ValueError(f"cannot balance arms: treated={n_t}, control={n_c}")
    w = np.where(ds.treatment == 1, ds.n / (2.0 * n_t), ds.n / (2.0 * n_c))
    return ds.with_weights(w)
