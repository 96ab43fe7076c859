"""Batch command-line interface.

Subcommands: featurize, train, predict, eval, bounds, experiment, oracle.
Exit codes: 0 success, 2 malformed input, 3 numeric failure under --strict.
MRC_THREADS caps the number of parallel experiment cells.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from .core import AlphaLoss, Dataset, LogLoss, ZeroOneLoss
from .data_io import (
    InputError,
    load_dataset,
    load_instances,
    load_model,
    save_feature_map,
    save_model,
)
from .entropies import empirical_risk
from .features import (
    StumpSpec,
    constraint_atoms,
    estimate_expectations,
    fit_thresholds,
    hoeffding_widths,
)
from .marginals import train_adversarial01, train_logreg
from .oracle import brute_force_max_entropy
from .predictors import predict_labels, predict_probs, sample_labels
from .solver import SolverConfig, train_mrc, train_zero_one_exact

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

METHODS = ("mrc-zero-one", "mrc-log", "adversarial-zero-one", "logistic-regression")


def _parse_loss(text):
    if text == "zero-one":
        return ZeroOneLoss()
    if text == "log":
        return LogLoss()
    if text.startswith("alpha:"):
        try:
            return AlphaLoss(float(text.split(":", 1)[1]))
        except ValueError as exc:
            raise InputError(f"bad alpha loss spec {text!r}: {exc}") from exc
    raise InputError(f"unknown loss {text!r} (use zero-one, log, or alpha:<a>)")


def _parse_widths(text, fm):
    """Width policy: scalar broadcast, file:<path>, or theorem3:<delta>."""
    if text.startswith("theorem3:"):
        try:
            delta = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad width policy {text!r}") from exc
        if not 0.0 < delta < 1.0:
            raise InputError("theorem3 delta must lie in (0, 1)")
        return hoeffding_widths(fm, delta), text
    if text.startswith("file:"):
        path = text.split(":", 1)[1]
        try:
            widths = np.loadtxt(path, dtype=np.float64).ravel()
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read widths file {path}: {exc}") from exc
        if widths.shape != (fm.dim,):
            raise InputError(
                f"widths file has {widths.shape[0]} entries, feature map needs {fm.dim}"
            )
        return widths, text
    try:
        scalar = float(text)
    except ValueError as exc:
        raise InputError(f"bad width policy {text!r}") from exc
    if scalar < 0.0:
        raise InputError("widths must be nonnegative")
    return np.full(fm.dim, scalar), text


def _solver_config(args):
    return SolverConfig(
        max_iters=args.max_iters,
        step_rule=args.step_rule,
        c=args.step_c,
        seed=args.seed,
    )


def _train_one(loss, box, atoms, cfg, fm, solver):
    if solver == "auto":
        solver = "exact" if isinstance(loss, ZeroOneLoss) and fm.num_classes <= 12 else "subgradient"
    if solver == "exact":
        if not isinstance(loss, ZeroOneLoss):
            raise InputError("the exact LP path applies to zero-one loss only")
        return train_zero_one_exact(box, atoms, cfg, feature_map=fm)
    return train_mrc(loss, box, atoms, cfg, feature_map=fm)


def _add_solver_flags(p):
    p.add_argument("--solver", choices=("auto", "exact", "subgradient"), default="auto")
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--step-c", type=float, default=0.3)
    p.add_argument("--step-rule", choices=("diminishing", "constant"), default="diminishing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-leaves", type=int, default=20)


def cmd_featurize(args):
    data = load_dataset(args.data, args.classes)
    fm = fit_thresholds(data, StumpSpec(args.max_leaves))
    save_feature_map(fm, args.out)
    print(f"thresholds {fm.num_thresholds}")
    print(f"features {fm.dim}")
    return EXIT_OK


def cmd_train(args):
    data = load_dataset(args.data, args.classes)
    loss = _parse_loss(args.loss)
    fm = fit_thresholds(data, StumpSpec(args.max_leaves))
    widths, policy = _parse_widths(getattr(args, "lambda"), fm)
    box = estimate_expectations(fm, data, widths)
    atoms = constraint_atoms(fm, data)
    model = _train_one(loss, box, atoms, _solver_config(args), fm, args.solver)
    upper = bounds_mod.upper_bound(model, box)
    stored = None
    print(f"upper_bound {upper!r}")
    if args.lower:
        report = bounds_mod.bound_report(model, box, atoms)
        print(f"lower_bound {report.lower!r}")
        stored = {
            "upper": report.upper,
            "lower": report.lower,
            **report.slack_terms,
        }
    if args.out:
        save_model(model, args.out, policy, data.n, bounds=stored)
    if args.strict and not model.converged:
        print("solver did not converge within the iteration budget", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_predict(args):
    model, _ = load_model(args.model)
    X = load_instances(args.data)
    try:
        probs = predict_probs(model, X)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    labels = np.argmax(probs, axis=1) + 1
    sampled = sample_labels(probs, args.seed) if args.seed is not None else None
    header = ["label"] + [f"prob_{y}" for y in range(1, model.num_classes + 1)]
    if sampled is not None:
        header.append("sampled")
    rows = []
    for i in range(X.shape[0]):
        row = [int(labels[i])] + [repr(float(v)) for v in probs[i]]
        if sampled is not None:
            row.append(int(sampled[i]))
        rows.append(row)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def _write_csv(path, header, rows):
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def cmd_eval(args):
    model, meta = load_model(args.model)
    data = load_dataset(args.data, model.num_classes)
    if data.num_classes != model.num_classes:
        raise InputError(
            f"data has {data.num_classes} classes, model expects {model.num_classes}"
        )
    probs = predict_probs(model, data.instances)
    risks = {
        "zero_one_risk": empirical_risk(ZeroOneLoss(), probs, data),
        "log_risk": empirical_risk(LogLoss(), probs, data),
    }
    if isinstance(model.loss, AlphaLoss):
        risks["alpha_risk"] = empirical_risk(model.loss, probs, data)
    for name, value in risks.items():
        print(f"{name} {value!r}")
    if args.bounds:
        stored = meta.get("bounds")
        if stored is None:
            raise InputError("model file carries no stored bounds (train with --lower)")
        own = {
            ZeroOneLoss: "zero_one_risk",
            LogLoss: "log_risk",
            AlphaLoss: "alpha_risk",
        }[type(model.loss)]
        risk = risks[own]
        ok = stored["lower"] <= risk <= stored["upper"]
        print(f"sandwich {stored['lower']!r} <= {risk!r} <= {stored['upper']!r} {'ok' if ok else 'VIOLATED'}")
    return EXIT_OK


def cmd_bounds(args):
    model, _ = load_model(args.model)
    data = load_dataset(args.data, model.num_classes)
    fm = model.feature_map
    widths, _ = _parse_widths(getattr(args, "lambda"), fm)
    box = estimate_expectations(fm, data, widths)
    atoms = constraint_atoms(fm, data)
    report = bounds_mod.bound_report(model, box, atoms)
    table = bounds_mod.model_loss_table(model, atoms)
    worst = bounds_mod.worst_case_risk(table, box, atoms)
    print(f"upper_bound {report.upper!r}")
    print(f"lower_bound {report.lower!r}")
    print(f"worst_case_risk {worst!r}")
    for name, value in report.slack_terms.items():
        print(f"{name} {value!r}")
    return EXIT_OK


def _experiment_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    required = {"dataset": str, "train_sizes": list, "repetitions": int, "test_size": int}
    for key, kind in required.items():
        if key not in cfg:
            raise InputError(f"config is missing {key!r}")
        if not isinstance(cfg[key], kind):
            raise InputError(f"config key {key!r} must be {kind.__name__}")
    if not all(isinstance(n, int) and n > 0 for n in cfg["train_sizes"]):
        raise InputError("train_sizes must be positive integers")
    if cfg["repetitions"] < 1 or cfg["test_size"] < 1:
        raise InputError("repetitions and test_size must be positive")
    cfg.setdefault("lambda", "0.25")
    cfg.setdefault("seed", 0)
    cfg.setdefault("max_leaves", 20)
    cfg.setdefault("methods", list(METHODS))
    cfg.setdefault("max_iters", 4000)
    cfg.setdefault("step_c", 0.3)
    bad = [m for m in cfg["methods"] if m not in METHODS]
    if bad:
        raise InputError(f"unknown methods {bad}; choose from {list(METHODS)}")
    return cfg


def _stratified_split(data: Dataset, n_train, n_test, rng):
    """Training indices stratified by label; test drawn from the remainder."""
    per_class = {}
    for y in range(1, data.num_classes + 1):
        per_class[y] = np.nonzero(data.labels == y)[0]
    counts = {y: idx.shape[0] for y, idx in per_class.items()}
    total = data.n
    take = {y: int(round(n_train * counts[y] / total)) for y in per_class}
    # fix rounding drift while keeping every class nonempty where possible
    drift = n_train - sum(take.values())
    order = sorted(per_class, key=lambda y: -counts[y])
    i = 0
    while drift != 0:
        y = order[i % len(order)]
        step = 1 if drift > 0 else -1
        if 0 <= take[y] + step <= counts[y]:
            take[y] += step
            drift -= step
        i += 1
    train_idx = []
    for y in sorted(per_class):
        picked = rng.choice(per_class[y], size=take[y], replace=False)
        train_idx.append(picked)
    train_idx = np.concatenate(train_idx)
    rest = np.setdiff1d(np.arange(total), train_idx)
    if rest.shape[0] < n_test:
        raise InputError(
            f"dataset too small: {total} rows cannot supply {n_train} train + {n_test} test"
        )
    test_idx = rng.choice(rest, size=n_test, replace=False)
    return train_idx, test_idx


def _subset(data: Dataset, idx) -> Dataset:
    return Dataset(
        instances=data.instances[idx],
        labels=data.labels[idx],
        num_classes=data.num_classes,
    )


def _run_cell(payload):
    """One (train size, repetition) cell; returns result rows."""
    cfg, X, y, num_classes, n, rep = payload
    data = Dataset(instances=X, labels=y, num_classes=num_classes)
    rng = np.random.default_rng([cfg["seed"], n, rep])
    train_idx, test_idx = _stratified_split(data, n, cfg["test_size"], rng)
    train = _subset(data, train_idx)
    test = _subset(data, test_idx)
    fm = fit_thresholds(train, StumpSpec(cfg["max_leaves"]))
    widths, _ = _parse_widths(cfg["lambda"], fm)
    box = estimate_expectations(fm, train, widths)
    atoms = constraint_atoms(fm, train)
    solver_cfg = SolverConfig(max_iters=cfg["max_iters"], c=cfg["step_c"])

    rows = []
    for method in cfg["methods"]:
        if method == "mrc-zero-one":
            if num_classes <= 12:
                model = train_zero_one_exact(box, atoms, solver_cfg, feature_map=fm)
            else:
                model = train_mrc(ZeroOneLoss(), box, atoms, solver_cfg, feature_map=fm)
            report = bounds_mod.bound_report(model, box, atoms)
            risk = empirical_risk(ZeroOneLoss(), predict_probs(model, test.instances), test)
            rows.append((n, rep, method, risk, report.upper, report.lower))
        elif method == "mrc-log":
            model = train_mrc(LogLoss(), box, atoms, solver_cfg, feature_map=fm)
            report = bounds_mod.bound_report(model, box, atoms)
            risk = empirical_risk(LogLoss(), predict_probs(model, test.instances), test)
            rows.append((n, rep, method, risk, report.upper, report.lower))
        elif method == "adversarial-zero-one":
            model = train_adversarial01(train, fm, widths, solver_cfg)
            risk = empirical_risk(ZeroOneLoss(), predict_probs(model, test.instances), test)
            rows.append((n, rep, method, risk, None, None))
        elif method == "logistic-regression":
            model = train_logreg(train, fm, widths, solver_cfg)
            risk = empirical_risk(LogLoss(), predict_probs(model, test.instances), test)
            rows.append((n, rep, method, risk, None, None))
    return rows


def cmd_experiment(args):
    cfg = _experiment_config(args.config)
    data = load_dataset(cfg["dataset"])
    payloads = [
        (cfg, np.asarray(data.instances), np.asarray(data.labels), data.num_classes, n, rep)
        for n in cfg["train_sizes"]
        for rep in range(cfg["repetitions"])
    ]
    workers = int(os.environ.get("MRC_THREADS", "0")) or min(len(payloads), os.cpu_count() or 1)
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_cell, payloads))
    else:
        chunks = [_run_cell(p) for p in payloads]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    formatted = [
        [
            r[0],
            r[1],
            r[2],
            repr(float(r[3])),
            "" if r[4] is None else repr(float(r[4])),
            "" if r[5] is None else repr(float(r[5])),
        ]
        for r in rows
    ]
    _write_csv(args.out, ["n", "seed", "method", "risk", "upper", "lower"], formatted)
    return EXIT_OK


def cmd_oracle(args):
    data = load_dataset(args.data, args.classes)
    loss = _parse_loss(args.loss)
    fm = fit_thresholds(data, StumpSpec(args.max_leaves))
    distinct = np.unique(data.instances, axis=0)
    cells = distinct.shape[0] * data.num_classes
    if cells > 8:
        raise InputError(
            f"{distinct.shape[0]} distinct instances x {data.num_classes} labels "
            "exceeds the enumeration budget (8 cells)"
        )
    widths, _ = _parse_widths(getattr(args, "lambda"), fm)
    box = estimate_expectations(fm, data, widths)
    atoms = constraint_atoms(fm, data)
    value = brute_force_max_entropy(loss, fm, distinct, box, args.grid_step)
    model = _train_one(loss, box, atoms, _solver_config(args), fm, args.solver)
    print(f"brute_force_max_entropy {value!r}")
    print(f"dual_objective {model.objective_value!r}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mrckit",
        description="Minimax risk classifiers with training-time risk bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="fit threshold features and save them")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-leaves", type=int, default=20)
    p.add_argument("--classes", type=int, default=None)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train a model and report its risk bounds")
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True, help="zero-one, log, or alpha:<a>")
    p.add_argument("--lambda", default="0.25", help="scalar, file:<path>, or theorem3:<delta>")
    p.add_argument("--out", default=None)
    p.add_argument("--lower", action="store_true", help="also compute the lower bound")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--classes", type=int, default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="per-instance labels and probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None, help="also emit sampled labels")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="empirical risks of a model on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--bounds", action="store_true", help="show the stored bound sandwich")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bounds", help="recompute bounds for a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", default="0.25")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="brute-force maximum entropy on tiny data")
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--lambda", default="0")
    p.add_argument("--grid-step", type=float, default=0.02)
    p.add_argument("--classes", type=int, default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
