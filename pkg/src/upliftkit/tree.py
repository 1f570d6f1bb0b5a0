"""Uplift decision tree with divergence / leaf-MSE split criteria.

Splits are ``x < threshold`` (left) versus ``x >= threshold`` (right), with
candidate thresholds at midpoints between consecutive distinct values. Every
child must keep at least ``min_leaf_per_arm`` treated and control rows.

Divergence criteria look at outcomes only through ``1[y < outcome_threshold]``
and score a split by the size-weighted treated/control distance in the
children minus the distance in the parent. ``leaf_mse`` scores a split by
the negated size-weighted within-leaf MSE after splitting each child by arm.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from sklearn.utils.validation import check_is_fitted

from ._validation import arm_counts, check_uplift_data, is_binary
from .base import UpliftEstimator, register

CRITERIA = ("divergence_abs_p", "divergence_kl", "divergence_euclid", "leaf_mse")
_GAIN_TOL = 1e-12


# -- distances ---------------------------------------------------------------

def _share(k, n, laplace):
    return (k + 1.0) / (n + 2.0) if laplace else k / n


def _distance(p1, p0, kind):
    if kind == "abs_p":
        return np.abs(p1 - p0)
    if kind == "euclid":
        return (p1 - p0) ** 2 + ((1 - p1) - (1 - p0)) ** 2
    if kind == "kl":
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(p1 > 0, p1 * np.log(p1 / p0), 0.0)
            b = np.where(p1 < 1, (1 - p1) * np.log((1 - p1) / (1 - p0)), 0.0)
        return a + b
    raise ValueError(f"unknown distance kind {kind!r}")


def arm_distance(treated_outcomes, control_outcomes, kind="abs_p", threshold=0.0, laplace=True):
    """Distance between treated and control outcome distributions.

    Each arm is summarized by the share of outcomes below ``threshold``
    (Laplace-smoothed as ``(k + 1) / (n + 2)`` unless ``laplace=False``).
    ``kind`` is ``"abs_p"``, ``"kl"`` or ``"euclid"``.
    """
    y1 = np.asarray(treated_outcomes, dtype=float)
    y0 = np.asarray(control_outcomes, dtype=float)
    if y1.size == 0 or y0.size == 0:
        raise ValueError("arm_distance needs both arms non-empty")
    p1 = _share(np.count_nonzero(y1 < threshold), y1.size, laplace)
    p0 = _share(np.count_nonzero(y0 < threshold), y0.size, laplace)
    return float(_distance(p1, p0, kind))


@dataclass(frozen=True)
class TreeConfig:
    criterion: str = "divergence_euclid"
    outcome_threshold: Optional[float] = None
    min_leaf_per_arm: int = 50
    max_depth: int = 4
    honest: bool = False
    laplace: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if int(self.min_leaf_per_arm) < 1:
            raise ValueError("min_leaf_per_arm must be >= 1")
        if int(self.max_depth) < 1:
            raise ValueError("max_depth must be >= 1")


def _sse(y):
    return float(np.sum((y - y.mean()) ** 2)) if y.size else 0.0


def split_gain(parent, left, right, config: TreeConfig = TreeConfig()):
    """Score one candidate split; larger is better.

    ``parent``, ``left`` and ``right`` are ``(outcome, treatment)`` pairs.
    Returns ``None`` when a child violates ``min_leaf_per_arm``.
    """
    m = config.min_leaf_per_arm
    for y, t in (left, right):
        n_t, n_c = arm_counts(t)
        if n_t < m or n_c < m:
            return None
    n_l, n_r = len(left[0]), len(right[0])
    total = n_l + n_r
    if config.criterion == "leaf_mse":
        sse = 0.0
        for y, t in (left, right):
            y, t = np.asarray(y, float), np.asarray(t)
            sse += _sse(y[t == 1]) + _sse(y[t == 0])
        return -sse / total
    kind = config.criterion.split("_", 1)[1]
    theta = 0.0 if config.outcome_threshold is None else config.outcome_threshold

    def dist(y, t):
        y, t = np.asarray(y, float), np.asarray(t)
        return arm_distance(y[t == 1], y[t == 0], kind, theta, config.laplace)

    return n_l / total * dist(*left) + n_r / total * dist(*right) - dist(*parent)


# -- nodes and rules ---------------------------------------------------------

@dataclass
class TreeNode:
    """Internal node (``feature >= 0``) or leaf (``feature == -1``).

    Arm statistics come from the estimation rows that reach the node.
    """

    n_treated: int
    n_control: int
    mean_treated: float
    mean_control: float
    var_treated: float
    var_control: float
    depth: int
    feature: int = -1
    threshold: float = math.nan
    gain: float = math.nan
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @property
    def tau_hat(self) -> float:
        return self.mean_treated - self.mean_control

    @property
    def t_statistic(self) -> float:
        """Welch t-statistic of ``mean_treated - mean_control``."""
        se2 = 0.0
        for var, n in ((self.var_treated, self.n_treated), (self.var_control, self.n_control)):
            if n < 2 or not math.isfinite(var):
                return math.nan
            se2 += var / n
        if se2 <= 0:
            return math.copysign(math.inf, self.tau_hat) if self.tau_hat else math.nan
        return self.tau_hat / math.sqrt(se2)

    def to_dict(self) -> dict:
        d = {
            "n_treated": self.n_treated,
            "n_control": self.n_control,
            "mean_treated": self.mean_treated,
            "mean_control": self.mean_control,
            "var_treated": _json_float(self.var_treated),
            "var_control": _json_float(self.var_control),
            "depth": self.depth,
            "tau_hat": self.tau_hat,
        }
        if not self.is_leaf:
            d.update(feature=self.feature, threshold=self.threshold, gain=_json_float(self.gain),
                     left=self.left.to_dict(), right=self.right.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        node = cls(
            int(d["n_treated"]), int(d["n_control"]),
            float(d["mean_treated"]), float(d["mean_control"]),
            _float(d["var_treated"]), _float(d["var_control"]), int(d["depth"]),
        )
        if "feature" in d:
            node.feature = int(d["feature"])
            node.threshold = float(d["threshold"])
            node.gain = _float(d.get("gain"))
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def _json_float(v):
    return None if v is None or not math.isfinite(v) else float(v)


def _float(v):
    return math.nan if v is None else float(v)


def _arm_stats(y, t):
    y1, y0 = y[t == 1], y[t == 0]

    def var(a):
        return float(np.var(a, ddof=1)) if a.size > 1 else math.nan

    return dict(
        n_treated=int(y1.size), n_control=int(y0.size),
        mean_treated=float(y1.mean()) if y1.size else math.nan,
        mean_control=float(y0.mean()) if y0.size else math.nan,
        var_treated=var(y1), var_control=var(y0),
    )


@dataclass(frozen=True)
class SubgroupRule:
    """Conjunction of ``lower <= x[feature] < upper`` conditions."""

    conditions: Tuple[Tuple[int, str, float, float], ...]
    effect: float
    n_treated: int
    n_control: int
    t_statistic: float

    def contains(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        mask = np.ones(X.shape[0], dtype=bool)
        for j, _, lo, hi in self.conditions:
            mask &= (X[:, j] >= lo) & (X[:, j] < hi)
        return mask

    def describe(self) -> str:
        parts = []
        for _, name, lo, hi in self.conditions:
            if math.isinf(lo):
                parts.append(f"{name} < {hi:g}")
            elif math.isinf(hi):
                parts.append(f"{name} >= {lo:g}")
            else:
                parts.append(f"{lo:g} <= {name} < {hi:g}")
        cond = " and ".join(parts) if parts else "all rows"
        return f"{cond}: effect={self.effect:.4g} (t={self.t_statistic:.3g}, n_t={self.n_treated}, n_c={self.n_control})"


# -- estimator -----------------------------------------------------------------

@register
class UpliftTree(UpliftEstimator):
    """Recursive-partitioning uplift tree.

    Parameters
    ----------
    criterion : {"divergence_abs_p", "divergence_kl", "divergence_euclid", "leaf_mse"}
        Split score. Divergence criteria split only on strictly positive
        gain; ``leaf_mse`` only when the within-leaf MSE strictly drops.
    outcome_threshold : float or None
        Cut point for ``1[y < threshold]`` in divergence criteria. ``None``
        means 0.5 for 0/1 outcomes and 0 otherwise.
    min_leaf_per_arm : int
        Minimum treated and control rows in every leaf (in both halves
        when honest).
    max_depth : int
        Number of node levels; ``max_depth=1`` is a single leaf.
    honest : bool
        Split rows 50/50 (seeded): one half chooses the splits, the other
        fills the leaf statistics.
    laplace : bool
        Smooth arm shares as ``(k + 1) / (n + 2)``.
    seed : int
        Seed for the honest split.

    Sample weights are accepted for API compatibility but ignored.
    """

    method = "tree"

    def __init__(self, criterion="divergence_euclid", outcome_threshold=None, min_leaf_per_arm=50,
                 max_depth=4, honest=False, laplace=True, seed=0):
        self.criterion = criterion
        self.outcome_threshold = outcome_threshold
        self.min_leaf_per_arm = min_leaf_per_arm
        self.max_depth = max_depth
        self.honest = honest
        self.laplace = laplace
        self.seed = seed

    @property
    def config(self) -> TreeConfig:
        return TreeConfig(self.criterion, self.outcome_threshold, self.min_leaf_per_arm,
                          self.max_depth, self.honest, self.laplace, self.seed)

    def fit(self, X, y, treatment, sample_weight=None):
        cfg = self.config
        X, y, t, _ = check_uplift_data(X, y, treatment, sample_weight)
        m = cfg.min_leaf_per_arm
        n_t, n_c = arm_counts(t)
        if n_t < 2 * m or n_c < 2 * m:
            raise ValueError(
                f"root needs at least {2 * m} rows per arm (treated={n_t}, control={n_c})"
            )
        if cfg.outcome_threshold is None:
            theta = 0.5 if is_binary(y) else 0.0
        else:
            theta = float(cfg.outcome_threshold)
        self.outcome_threshold_ = theta

        rows = np.arange(y.size)
        if cfg.honest:
            perm = np.random.default_rng(cfg.seed).permutation(y.size)
            half = y.size // 2
            struct_rows, est_rows = np.sort(perm[:half]), np.sort(perm[half:])
            for name, r in (("structure", struct_rows), ("estimation", est_rows)):
                a, b = arm_counts(t[r])
                if a < m or b < m:
                    raise ValueError(f"honest {name} half has too few rows per arm ({a}, {b})")
        else:
            struct_rows = est_rows = rows
        self.estimation_rows_ = est_rows
        self.structure_rows_ = struct_rows

        self._X, self._y, self._t, self._theta = X, y, t, theta
        self.root_ = self._grow(struct_rows, est_rows if cfg.honest else None, depth=1)
        del self._X, self._y, self._t, self._theta
        self.n_features_in_ = X.shape[1]
        self._flatten()
        return self

    # recursion over (structure rows, estimation rows)
    def _grow(self, s_rows, e_rows, depth):
        rows_for_stats = s_rows if e_rows is None else e_rows
        node = TreeNode(depth=depth, **_arm_stats(self._y[rows_for_stats], self._t[rows_for_stats]))
        if depth >= self.max_depth:
            return node
        best = self._best_split(s_rows, e_rows)
        if best is None:
            return node
        j, thr, gain = best
        node.feature, node.threshold, node.gain = j, thr, gain
        go_left = self._X[s_rows, j] < thr
        if e_rows is None:
            node.left = self._grow(s_rows[go_left], None, depth + 1)
            node.right = self._grow(s_rows[~go_left], None, depth + 1)
        else:
            e_left = self._X[e_rows, j] < thr
            node.left = self._grow(s_rows[go_left], e_rows[e_left], depth + 1)
            node.right = self._grow(s_rows[~go_left], e_rows[~e_left], depth + 1)
        return node

    def _best_split(self, s_rows, e_rows):
        """Return ``(feature, threshold, gain)`` of the best valid split or None."""
        m = self.min_leaf_per_arm
        y, t = self._y[s_rows], self._t[s_rows]
        n = y.size
        is_mse = self.criterion == "leaf_mse"
        if is_mse:
            parent_score = -(_sse(y[t == 1]) + _sse(y[t == 0])) / n
            stat = y
        else:
            kind = self.criterion.split("_", 1)[1]
            a = (y < self._theta).astype(float)
            n1, n0 = t.sum(), n - t.sum()
            parent_score = float(_distance(_share((a * t).sum(), n1, self.laplace),
                                           _share((a * (1 - t)).sum(), n0, self.laplace), kind))
            stat = a
        if e_rows is not None:
            e_t = self._t[e_rows]

        best = None
        for j in range(self._X.shape[1]):
            x = self._X[s_rows, j]
            order = np.argsort(x, kind="stable")
            xs, ts, ss = x[order], t[order], stat[order]
            distinct = xs[:-1] < xs[1:]
            if not distinct.any():
                continue
            cnt_t = np.cumsum(ts)[:-1]
            cnt_l = np.arange(1, n)
            cnt_c = cnt_l - cnt_t
            tot_t = ts.sum()
            tot_c = n - tot_t
            ok = distinct & (cnt_t >= m) & (cnt_c >= m) & (tot_t - cnt_t >= m) & (tot_c - cnt_c >= m)
            if not ok.any():
                continue
            idx = np.nonzero(ok)[0]
            thr = 0.5 * (xs[idx] + xs[idx + 1])
            if e_rows is not None:
                xe = self._X[e_rows, j]
                xe1, xe0 = np.sort(xe[e_t == 1]), np.sort(xe[e_t == 0])
                l1 = np.searchsorted(xe1, thr, side="left")
                l0 = np.searchsorted(xe0, thr, side="left")
                keep = (l1 >= m) & (l0 >= m) & (xe1.size - l1 >= m) & (xe0.size - l0 >= m)
                if not keep.any():
                    continue
                idx, thr = idx[keep], thr[keep]

            lt, lc = cnt_t[idx], cnt_c[idx]
            rt, rc = tot_t - lt, tot_c - lc
            if is_mse:
                s1 = np.cumsum(ss * ts)[:-1][idx]
                s0 = np.cumsum(ss * (1 - ts))[:-1][idx]
                q1 = np.cumsum(ss**2 * ts)[:-1][idx]
                q0 = np.cumsum(ss**2 * (1 - ts))[:-1][idx]
                S1, S0 = (ss * ts).sum(), (ss * (1 - ts)).sum()
                Q1, Q0 = (ss**2 * ts).sum(), (ss**2 * (1 - ts)).sum()
                sse = (
                    q1 - s1**2 / lt + q0 - s0**2 / lc
                    + (Q1 - q1) - (S1 - s1) ** 2 / rt + (Q0 - q0) - (S0 - s0) ** 2 / rc
                )
                gains = -np.clip(sse, 0.0, None) / n
            else:
                k1 = np.cumsum(ss * ts)[:-1][idx]
                k0 = np.cumsum(ss * (1 - ts))[:-1][idx]
                K1, K0 = (ss * ts).sum(), (ss * (1 - ts)).sum()
                lap = self.laplace
                d_left = _distance(_share(k1, lt, lap), _share(k0, lc, lap), kind)
                d_right = _distance(_share(K1 - k1, rt, lap), _share(K0 - k0, rc, lap), kind)
                n_left = lt + lc
                gains = n_left / n * d_left + (n - n_left) / n * d_right - parent_score

            i = int(np.argmax(gains))
            g = float(gains[i])
            if best is None or g > best[2]:
                best = (j, float(thr[i]), g)

        if best is None:
            return None
        improvement = best[2] - parent_score if is_mse else best[2]
        if not improvement > _GAIN_TOL:
            return None
        return best

    def _flatten(self):
        feats, thrs, lefts, rights, vals = [], [], [], [], []

        def visit(node):
            i = len(feats)
            feats.append(node.feature)
            thrs.append(node.threshold)
            lefts.append(-1)
            rights.append(-1)
            vals.append(node.tau_hat)
            if not node.is_leaf:
                lefts[i] = visit(node.left)
                rights[i] = visit(node.right)
            return i

        visit(self.root_)
        self._feat = np.array(feats, dtype=int)
        self._thr = np.array(thrs, dtype=float)
        self._left = np.array(lefts, dtype=int)
        self._right = np.array(rights, dtype=int)
        self._value = np.array(vals, dtype=float)

    def apply(self, X):
        """Index (in pre-order) of the leaf each row lands in."""
        check_is_fitted(self, "root_")
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        while True:
            internal = self._feat[node] >= 0
            if not internal.any():
                return node
            r = rows[internal]
            nd = node[internal]
            go_left = X[r, self._feat[nd]] < self._thr[nd]
            node[r] = np.where(go_left, self._left[nd], self._right[nd])

    def _predict(self, X):
        return self._value[self.apply(X)]

    def leaves(self) -> List[TreeNode]:
        check_is_fitted(self, "root_")
        out = []

        def visit(node):
            if node.is_leaf:
                out.append(node)
            else:
                visit(node.left)
                visit(node.right)

        visit(self.root_)
        return out

    @property
    def depth_(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def _state_dict(self):
        return {"outcome_threshold": self.outcome_threshold_, "root": self.root_.to_dict()}

    def _load_state(self, state):
        self.outcome_threshold_ = float(state["outcome_threshold"])
        self.root_ = TreeNode.from_dict(state["root"])
        self._flatten()


def build_tree(ds, config: TreeConfig = TreeConfig()) -> UpliftTree:
    tree = UpliftTree(config.criterion, config.outcome_threshold, config.min_leaf_per_arm,
                      config.max_depth, config.honest, config.laplace, config.seed)
    return tree.fit_dataset(ds)


def extract_rules(tree: UpliftTree, min_t_stat: float = 2.0) -> List[SubgroupRule]:
    """Leaves whose Welch t-statistic exceeds ``min_t_stat``, as interval rules."""
    check_is_fitted(tree, "root_")
    names = tree._names()
    rules = []

    def visit(node, bounds):
        if node.is_leaf:
            ts = node.t_statistic
            if ts > min_t_stat:
                conds = tuple((j, names[j], lo, hi) for j, (lo, hi) in sorted(bounds.items()))
                rules.append(SubgroupRule(conds, node.tau_hat, node.n_treated, node.n_control, ts))
            return
        j, thr = node.feature, node.threshold
        lo, hi = bounds.get(j, (-math.inf, math.inf))
        left = dict(bounds)
        left[j] = (lo, min(hi, thr))
        right = dict(bounds)
        right[j] = (max(lo, thr), hi)
        visit(node.left, left)
        visit(node.right, right)

    visit(tree.root_, {})
    return rules
