"""Repeated train/test comparison of uplift models on one dataset.

Per repetition: split the data, fit every model on the train part, predict
effects on the test part, select the test rows with a strictly positive
prediction and record the treated-minus-control mean difference on them.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from .base import estimator_class
from .dataset import Dataset, load_csv, split_train_test
from .evaluation import UndefinedEffectError, qini_curve, qini_index, welch_effect
from .synth import generate

ModelSpec = Union[str, Tuple[str, Dict]]

DEFAULT_MODELS = ("all", "best", "tian", "two_model", "tree", "forest")
QUANTILES = (0.25, 0.5, 0.75)

# hyperparameters used when a model is named without parameters
MODEL_DEFAULTS = {
    "tree": {"criterion": "divergence_euclid", "min_leaf_per_arm": 50, "max_depth": 4},
    "forest": {"n_trees": 100, "criterion": "divergence_euclid", "min_leaf_per_arm": 50, "max_depth": 4},
}


def make_model(spec: ModelSpec, law: Optional[str] = None):
    """Build an unfitted estimator from ``"name"`` or ``("name", params)``."""
    name, params = (spec, {}) if isinstance(spec, str) else spec
    params = {**MODEL_DEFAULTS.get(name, {}), **params}
    if name == "best":
        if law is None:
            raise ValueError("the best baseline needs a synthetic source with a known effect")
        params.setdefault("true_tau", law)
    return estimator_class(name)(**params)


def model_label(spec: ModelSpec) -> str:
    return spec if isinstance(spec, str) else spec[0]


@dataclass(frozen=True)
class BenchmarkConfig:
    law: Optional[str] = "law7"
    n: int = 6000
    data_path: Optional[str] = None
    models: Sequence[ModelSpec] = DEFAULT_MODELS
    repetitions: int = 100
    train_fraction: float = 0.8
    seed: int = 0
    with_qini: bool = False
    outcome_col: str = "y"
    treatment_col: str = "t"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.models:
            raise ValueError("at least one model is required")
        if (self.law is None) == (self.data_path is None):
            raise ValueError("give exactly one of law or data_path")
        labels = [model_label(m) for m in self.models]
        if len(set(labels)) != len(labels):
            raise ValueError("model names must be unique")
        if self.data_path is not None and "best" in labels:
            raise ValueError("the best baseline needs a synthetic source with a known effect")


@dataclass(frozen=True)
class Record:
    model: str
    repetition: int
    effect: float
    stderr: float
    n_selected: int
    status: str
    qini_index: float = math.nan

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class ModelSummary:
    model: str
    n_ok: int
    n_failed: int
    q25: float = math.nan
    median: float = math.nan
    q75: float = math.nan
    min: float = math.nan
    max: float = math.nan

    def to_dict(self) -> dict:
        out = {"model": self.model, "n_ok": self.n_ok, "n_failed": self.n_failed}
        if self.n_ok:
            out.update(q25=self.q25, median=self.median, q75=self.q75, min=self.min, max=self.max)
        return out


@dataclass(frozen=True)
class BenchmarkReport:
    config: BenchmarkConfig
    records: List[Record] = field(default_factory=list)

    def for_model(self, model: str) -> List[Record]:
        return [r for r in self.records if r.model == model]

    def effects(self, model: str) -> np.ndarray:
        return np.array([r.effect for r in self.for_model(model) if r.ok])


def _rep_seeds(seed, rep):
    ss = np.random.SeedSequence([int(seed), int(rep)])
    split_seed, model_seed = (int(s) for s in ss.generate_state(2))
    return split_seed, model_seed


def _run_rep(ds: Dataset, config: BenchmarkConfig, rep: int) -> List[Record]:
    split_seed, model_seed = _rep_seeds(config.seed, rep)
    train, test = split_train_test(ds, config.train_fraction, split_seed)
    out = []
    for spec in config.models:
        label = model_label(spec)
        try:
            est = make_model(spec, config.law)
            if "seed" in est.get_params():
                est.set_params(seed=model_seed)
            est.fit_dataset(train)
            pred = est.predict(test.features)
        except (ValueError, np.linalg.LinAlgError) as exc:
            out.append(Record(label, rep, math.nan, math.nan, 0, f"fit failed: {exc}"))
            continue
        qidx = math.nan
        if config.with_qini:
            try:
                qidx = qini_index(qini_curve(test.outcome, test.treatment, pred))
            except ValueError:
                pass
        selected = pred > 0
        n_sel = int(np.count_nonzero(selected))
        try:
            est_eff = welch_effect(test.outcome[selected], test.treatment[selected])
        except UndefinedEffectError as exc:
            out.append(Record(label, rep, math.nan, math.nan, n_sel, f"no effect: {exc}", qidx))
            continue
        out.append(Record(label, rep, est_eff.effect, est_eff.stderr, n_sel, "ok", qidx))
    return out


def load_source(config: BenchmarkConfig) -> Dataset:
    if config.data_path is not None:
        return load_csv(config.data_path, config.outcome_col, config.treatment_col)
    return generate(config.law, config.n, config.seed).dataset


def run_benchmark(config: BenchmarkConfig, n_jobs=None) -> BenchmarkReport:
    """Run every repetition; the report does not depend on ``n_jobs``."""
    ds = load_source(config)
    per_rep = Parallel(n_jobs=n_jobs)(
        delayed(_run_rep)(ds, config, rep) for rep in range(config.repetitions)
    )
    return BenchmarkReport(config, [r for recs in per_rep for r in recs])


def summarize(report: BenchmarkReport) -> List[ModelSummary]:
    """Per-model quartiles (linear interpolation), min, max and failure count."""
    out = []
    for spec in report.config.models:
        label = model_label(spec)
        recs = report.for_model(label)
        vals = np.array([r.effect for r in recs if r.ok])
        n_failed = len(recs) - vals.size
        if vals.size == 0:
            out.append(ModelSummary(label, 0, n_failed))
            continue
        q25, q50, q75 = (float(v) for v in np.quantile(vals, QUANTILES, method="linear"))
        out.append(ModelSummary(label, int(vals.size), n_failed, q25, q50, q75,
                                float(vals.min()), float(vals.max())))
    return out


# -- output --------------------------------------------------------------------

def _num(v: float) -> str:
    return "" if not math.isfinite(v) else repr(float(v))


def records_csv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["model", "repetition", "effect", "stderr", "n_selected", "status"]
    if report.config.with_qini:
        cols.append("qini_index")
    w.writerow(cols)
    for r in report.records:
        row = [r.model, r.repetition, _num(r.effect), _num(r.stderr), r.n_selected, r.status]
        if report.config.with_qini:
            row.append(_num(r.qini_index))
        w.writerow(row)
    return buf.getvalue()


def summary_json(report: BenchmarkReport, command: Optional[str] = None) -> str:
    cfg = report.config
    doc = {
        "command": command,
        "config": {
            "law": cfg.law, "n": cfg.n if cfg.law else None, "data_path": cfg.data_path,
            "models": [model_label(m) for m in cfg.models], "repetitions": cfg.repetitions,
            "train_fraction": cfg.train_fraction, "seed": cfg.seed,
        },
        "models": [s.to_dict() for s in summarize(report)],
    }
    if cfg.with_qini:
        for entry in doc["models"]:
            q = [r.qini_index for r in report.for_model(entry["model"]) if math.isfinite(r.qini_index)]
            entry["qini_index_median"] = float(np.median(q)) if q else None
    return json.dumps(doc, indent=2) + "\n"


def box_plot_svg(summaries: Sequence[ModelSummary], title: str = "Effect on selected subgroup") -> str:
    """Static box plot: whiskers at min/max, box at quartiles, line at median."""
    ok = [s for s in summaries if s.n_ok]
    width, height = 120 + 110 * max(len(summaries), 1), 360
    top, bottom, left = 40, 300, 70
    if ok:
        lo = min(s.min for s in ok)
        hi = max(s.max for s in ok)
    else:
        lo, hi = 0.0, 1.0
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def ypos(v):
        return bottom - (v - lo) / (hi - lo) * (bottom - top)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
    ]
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = ypos(v)
        parts.append(f'<line x1="{left - 4}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.3f}</text>')
    if lo < 0 < hi:
        y0 = ypos(0.0)
        parts.append(f'<line x1="{left}" y1="{y0:.1f}" x2="{width - 20}" y2="{y0:.1f}" '
                     f'stroke="#999" stroke-dasharray="4,3"/>')
    for i, s in enumerate(summaries):
        cx = left + 60 + 110 * i
        parts.append(f'<text x="{cx}" y="{bottom + 20}" text-anchor="middle">{s.model}</text>')
        if not s.n_ok:
            parts.append(f'<text x="{cx}" y="{(top + bottom) / 2:.1f}" text-anchor="middle">no data</text>')
            continue
        y_min, y_q1, y_med, y_q3, y_max = (ypos(v) for v in (s.min, s.q25, s.median, s.q75, s.max))
        parts += [
            f'<line x1="{cx}" y1="{y_max:.1f}" x2="{cx}" y2="{y_q3:.1f}" stroke="black"/>',
            f'<line x1="{cx}" y1="{y_q1:.1f}" x2="{cx}" y2="{y_min:.1f}" stroke="black"/>',
            f'<line x1="{cx - 15}" y1="{y_max:.1f}" x2="{cx + 15}" y2="{y_max:.1f}" stroke="black"/>',
            f'<line x1="{cx - 15}" y1="{y_min:.1f}" x2="{cx + 15}" y2="{y_min:.1f}" stroke="black"/>',
            f'<rect x="{cx - 30}" y="{y_q3:.1f}" width="60" height="{max(y_q1 - y_q3, 0.5):.1f}" '
            f'fill="#cfe2f3" stroke="black"/>',
            f'<line x1="{cx - 30}" y1="{y_med:.1f}" x2="{cx + 30}" y2="{y_med:.1f}" '
            f'stroke="black" stroke-width="2"/>',
        ]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
