"""Command-line interface: ``upliftkit <subcommand> [flags]``.

Data goes to files (or standard output for JSON summaries when no path is
given); diagnostics go to standard error. Exit status is 0 on success, 1 on
a failed operation and 2 on a usage error.
"""

import argparse
import json
import math
import os
import shlex
import sys

import numpy as np

from . import __version__
from .base import estimator_class
from .bench import DEFAULT_MODELS, BenchmarkConfig, box_plot_svg, records_csv, run_benchmark, \
    summarize, summary_json
from .dataset import csv_text, dataset_csv, load_csv, read_table
from .evaluation import qini_curve, qini_index, validation_regression
from .persistence import atomic_write, load_model, model_to_json
from .synth import generate
from .tree import CRITERIA

LAWS = ("3", "4", "7")
TRAIN_METHODS = ("two_model", "transformed", "tian", "interaction", "tree", "forest")

# flag dest -> estimator parameter, for the methods that accept it
METHOD_FLAGS = {
    "ridge": ("ridge", {"two_model", "transformed", "tian", "interaction"}),
    "no_balance": ("balance_arms", {"tian"}),
    "criterion": ("criterion", {"tree", "forest"}),
    "outcome_threshold": ("outcome_threshold", {"tree", "forest"}),
    "min_leaf": ("min_leaf_per_arm", {"tree", "forest"}),
    "max_depth": ("max_depth", {"tree", "forest"}),
    "honest": ("honest", {"tree", "forest"}),
    "no_laplace": ("laplace", {"tree", "forest"}),
    "seed": ("seed", {"tree", "forest"}),
    "n_trees": ("n_trees", {"forest"}),
    "row_fraction": ("row_fraction", {"forest"}),
    "feature_fraction": ("feature_fraction", {"forest"}),
    "without_replacement": ("with_replacement", {"forest"}),
}
NEGATED = {"no_balance", "no_laplace", "without_replacement"}


class CommandError(Exception):
    """Operation failed; reported on stderr with exit status 1."""


def _law_name(law: str) -> str:
    return f"law{law}"


def _emit_json(doc, path):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_generate(args):
    if args.n < 1:
        raise CommandError("--n must be >= 1")
    sample = generate(_law_name(args.law), args.n, args.seed)
    atomic_write(args.out, dataset_csv(sample.dataset))
    if args.with_truth:
        atomic_write(args.with_truth, csv_text(["true_tau"], [sample.true_tau]))


def _method_params(args):
    params = {}
    for dest, (param, methods) in METHOD_FLAGS.items():
        value = getattr(args, dest)
        if value is None or value is False:
            continue
        if args.method not in methods:
            raise CommandError(f"--{dest.replace('_', '-')} does not apply to method {args.method}")
        params[param] = (not value) if dest in NEGATED else value
    if args.method == "forest" and args.n_jobs is not None:
        params["n_jobs"] = args.n_jobs
    return params


def cmd_train(args):
    ds = load_csv(args.data, args.outcome_col, args.treatment_col)
    est = estimator_class(args.method)(**_method_params(args))
    est.fit_dataset(ds)
    if hasattr(est, "n_jobs"):
        # runtime-only setting; keeps model files identical across --n-jobs values
        est.set_params(n_jobs=None)
    atomic_write(args.model_out, model_to_json(est))


def cmd_predict(args):
    model = load_model(args.model)
    header, values = read_table(args.data)
    names = [h for h in header if h not in (args.outcome_col, args.treatment_col)]
    if names != list(model.feature_names_):
        raise CommandError(
            f"schema mismatch: data features {names} differ from model features "
            f"{list(model.feature_names_)}"
        )
    X = values[:, [header.index(h) for h in names]]
    tau = model.predict(X)
    atomic_write(args.out, csv_text(["tau_hat"], [tau]))


def _scored(args):
    header, values = read_table(args.data)
    cols = (args.outcome_col, args.treatment_col, args.pred_col)
    missing = [c for c in cols if c not in header]
    if missing:
        raise CommandError(f"{args.data}: missing column(s) {missing}")
    return tuple(values[:, header.index(c)] for c in cols)


def _clean(v):
    return float(v) if math.isfinite(v) else None


def cmd_qini(args):
    y, t, p = _scored(args)
    curve = qini_curve(y, t, p)
    rows = list(curve.rows())
    text = "alpha,tau_at_alpha,qini\n" + "".join(
        ",".join("" if not math.isfinite(v) else repr(v) for v in row) + "\n" for row in rows
    )
    atomic_write(args.out, text)
    doc = {"n": int(y.size), "tau_rnd": curve.tau_rnd, "qini_index": qini_index(curve)}
    try:
        doc["validation"] = validation_regression(y, t, p).to_dict()
    except ValueError as exc:
        doc["validation"] = {"error": str(exc)}
    _emit_json(doc, args.json_out)


def cmd_validate(args):
    y, t, p = _scored(args)
    fit = validation_regression(y, t, p)
    doc = fit.to_dict()
    doc["alpha_3_t"] = _clean(fit.alpha_3_t)
    _emit_json(doc, args.out)


def cmd_benchmark(args, argv):
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    for m in models:
        estimator_class(m)
    config = BenchmarkConfig(
        law=_law_name(args.law) if args.law else None,
        n=args.n,
        data_path=args.data,
        models=models,
        repetitions=args.reps,
        train_fraction=args.train_fraction,
        seed=args.seed,
        with_qini=args.with_qini,
        outcome_col=args.outcome_col,
        treatment_col=args.treatment_col,
    )
    report = run_benchmark(config, n_jobs=args.n_jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    command = shlex.join(["upliftkit", *argv])
    atomic_write(os.path.join(args.out_dir, "records.csv"), records_csv(report))
    atomic_write(os.path.join(args.out_dir, "summary.json"), summary_json(report, command))
    atomic_write(os.path.join(args.out_dir, "boxplot.svg"), box_plot_svg(summarize(report)))
    failed = sum(1 for r in report.records if not r.ok)
    if failed:
        print(f"upliftkit: {failed} of {len(report.records)} records failed; see records.csv",
              file=sys.stderr)


# -- parser --------------------------------------------------------------------

def _add_columns(p, pred=False):
    p.add_argument("--outcome-col", default="y", help="outcome column name (default: y)")
    p.add_argument("--treatment-col", default="t", help="treatment column name (default: t)")
    if pred:
        p.add_argument("--pred-col", default="tau_hat", help="prediction column (default: tau_hat)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="upliftkit", description="Uplift modelling toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("generate", help="write a synthetic randomized-trial dataset")
    p.add_argument("--law", required=True, choices=LAWS)
    p.add_argument("--n", type=int, default=6000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--with-truth", metavar="PATH", help="also write the true effect per row here")

    p = sub.add_parser("train", help="fit an estimator and save it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=TRAIN_METHODS)
    p.add_argument("--model-out", required=True)
    _add_columns(p)
    g = p.add_argument_group("linear methods")
    g.add_argument("--ridge", type=float)
    g.add_argument("--no-balance", action="store_true", help="tian: keep the raw arm weights")
    g = p.add_argument_group("tree and forest")
    g.add_argument("--criterion", choices=CRITERIA)
    g.add_argument("--outcome-threshold", type=float)
    g.add_argument("--min-leaf", type=int)
    g.add_argument("--max-depth", type=int)
    g.add_argument("--honest", action="store_true")
    g.add_argument("--no-laplace", action="store_true")
    g.add_argument("--seed", type=int)
    g = p.add_argument_group("forest only")
    g.add_argument("--n-trees", type=int)
    g.add_argument("--row-fraction", type=float)
    g.add_argument("--feature-fraction", type=float)
    g.add_argument("--without-replacement", action="store_true")
    g.add_argument("--n-jobs", type=int)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    _add_columns(p)

    p = sub.add_parser("qini", help="Qini curve, index and validation fit for scored data")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="curve CSV")
    p.add_argument("--json-out", help="summary JSON (default: standard output)")
    _add_columns(p, pred=True)

    p = sub.add_parser("validate", help="validation regression for scored data")
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="JSON output (default: standard output)")
    _add_columns(p, pred=True)

    p = sub.add_parser("benchmark", help="repeated train/test model comparison")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--law", choices=LAWS)
    src.add_argument("--data")
    p.add_argument("--n", type=int, default=6000)
    p.add_argument("--models", default=",".join(DEFAULT_MODELS))
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-qini", action="store_true")
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--out-dir", required=True)
    _add_columns(p)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": cmd_generate, "train": cmd_train, "predict": cmd_predict,
        "qini": cmd_qini, "validate": cmd_validate,
    }
    try:
        if args.command == "benchmark":
            cmd_benchmark(args, argv)
        else:
            handlers[args.command](args)
    except (CommandError, ValueError, OSError, KeyError, np.linalg.LinAlgError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"upliftkit: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
