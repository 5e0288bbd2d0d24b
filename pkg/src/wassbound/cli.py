"""Command-line interface.

Subcommands: ``w1`` (distance between two CSV measures), ``bound`` (evaluate
a named bound), ``cover`` (covering formulas / greedy covers), ``simulate``
and ``markov`` (experiment configs), ``report`` (render a results file).

Exit status: 0 success / no violations, 2 violations found, 1 error.  The
``WASSBOUND_SEED`` environment variable provides the default seed;
``--seed`` overrides it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import covering, harness
from .errors import WassboundError
from .markov import bound_markov
from .metric_measure import EUCLIDEAN, DiscreteMeasure, Metric
from .wasserstein import w1_exact

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATIONS = 2


def _read_measure_csv(path: str) -> DiscreteMeasure:
    """CSV rows are 'x1,...,xd,weight'; weights renormalize to 1."""
    rows = np.loadtxt(path, delimiter=",", ndmin=2)
    if rows.shape[1] < 2:
        raise WassboundError(f"{path}: need at least one coordinate and a weight column")
    return DiscreteMeasure.from_raw(rows[:, :-1], rows[:, -1])


def _metric_from_args(args) -> Metric:
    if args.metric == "euclidean":
        return EUCLIDEAN
    if args.metric == "sup":
        return Metric("sup_norm_path")
    return Metric("holder_seminorm", alpha=args.alpha)


def _cmd_w1(args) -> int:
    mu = _read_measure_csv(args.file_a)
    nu = _read_measure_csv(args.file_b)
    value, _ = w1_exact(mu, nu, _metric_from_args(args))
    print(f"{value!r}")
    return EXIT_OK


def _cmd_bound(args) -> int:
    name = args.name
    p = dict(kv.split("=", 1) for kv in args.param)
    get = lambda key, cast=float: cast(p[key])
    if name == "t1":
        report = bounds_mod.bound_t1(get("C"), get("log_Ct"), get("t"), get("n", int))
    elif name == "modified":
        report = bounds_mod.bound_modified(get("C"), get("log_Ct"), get("t"), get("n", int))
    elif name == "rd":
        report = bounds_mod.bound_rd(
            get("a"), get("C"), get("d", int), get("t"), get("n", int)
        )
    elif name == "variant":
        report = bounds_mod.bound_variant(
            get("C"), get("k", int), get("D"), get("t"), get("n", int)
        )
    elif name == "gaussian_banach":
        lam1 = get("lambda1")
        psi = lambda u: lam1 / (u * u)
        report = bounds_mod.bound_gaussian_banach(
            psi, get("sigma"), get("t"), get("n", int)
        )
    elif name == "markov":
        report = bound_markov(
            get("C"), get("r"), get("m1"), get("d", int), get("t"), get("n", int)
        )
    else:
        raise WassboundError(f"unknown bound name {name!r}")
    print(report.to_json())
    return EXIT_OK


def _cmd_cover(args) -> int:
    if args.kind == "euclidean":
        print(repr(covering.n_euclidean_ball(args.R, args.delta, args.d)))
    elif args.kind == "holder":
        print(repr(covering.n_holder_ball(args.R, args.delta, args.alpha)))
    elif args.kind == "lipschitz-crude":
        print(repr(covering.n_lipschitz_crude(args.n_k, args.R, args.eps)))
    elif args.kind == "lipschitz-tree":
        print(repr(covering.n_lipschitz_tree(args.n_k, args.R, args.eps)))
    else:  # greedy
        pts = np.loadtxt(args.points, delimiter=",", ndmin=2)
        space = covering.FiniteMetricSpace(pts)
        result = covering.greedy_cover(space, args.delta)
        print(json.dumps({"count": result.count, "centers": result.centers.tolist()}))
    return EXIT_OK


def _load_config(args) -> harness.ExperimentConfig:
    with open(args.config) as fh:
        raw = json.load(fh)
    if args.seed is not None:
        raw["seed"] = args.seed
    elif "seed" not in raw and os.environ.get(harness.SEED_ENV_VAR):
        raw["seed"] = int(os.environ[harness.SEED_ENV_VAR])
    if args.output is not None:
        raw["output"] = args.output
    if args.trials is not None:
        raw["trials"] = args.trials
    return harness.ExperimentConfig.from_dict(raw)


def _cmd_simulate(args, kind: str) -> int:
    cfg = _load_config(args)
    if kind == "markov" and cfg.kind != "markov":
        raise WassboundError("markov subcommand needs a config with kind = 'markov'")
    rows = harness.run_experiment(cfg)
    text, _ = harness.report_tables(rows)
    print(text, end="")
    bad = harness.violations(rows)
    if bad:
        print(f"{len(bad)} violation(s) found", file=sys.stderr)
        return EXIT_VIOLATIONS
    return EXIT_OK


def _cmd_report(args) -> int:
    with open(args.results) as fh:
        payload = json.load(fh)
    rows = [harness.ComparisonRow(**row) for row in payload["rows"]]
    text, csv_text = harness.report_tables(rows)
    print(text, end="")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    return EXIT_VIOLATIONS if harness.violations(rows) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wassbound")
    sub = parser.add_subparsers(dest="command", required=True)

    w1p = sub.add_parser("w1", help="exact W1 between two CSV measures")
    w1p.add_argument("file_a")
    w1p.add_argument("file_b")
    w1p.add_argument("--metric", choices=["euclidean", "sup", "holder"], default="euclidean")
    w1p.add_argument("--alpha", type=float, default=0.5)

    bp = sub.add_parser("bound", help="evaluate a named bound")
    bp.add_argument("name")
    bp.add_argument("--param", "-p", action="append", default=[], metavar="KEY=VALUE")

    cp = sub.add_parser("cover", help="covering numbers and greedy covers")
    cp.add_argument("kind", choices=["euclidean", "holder", "lipschitz-crude", "lipschitz-tree", "greedy"])
    cp.add_argument("--R", type=float, default=1.0)
    cp.add_argument("--delta", type=float, default=0.1)
    cp.add_argument("--eps", type=float, default=0.1)
    cp.add_argument("--d", type=int, default=1)
    cp.add_argument("--alpha", type=float, default=0.5)
    cp.add_argument("--n-k", type=float, default=1.0)
    cp.add_argument("--points", help="CSV point file for greedy covers")

    for name in ("simulate", "markov"):
        ep = sub.add_parser(name, help=f"run a {name} experiment config")
        ep.add_argument("--config", required=True)
        ep.add_argument("--seed", type=int, default=None)
        ep.add_argument("--output", default=None)
        ep.add_argument("--trials", type=int, default=None)

    rp = sub.add_parser("report", help="render a results JSON file")
    rp.add_argument("results")
    rp.add_argument("--csv", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "w1":
            return _cmd_w1(args)
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "cover":
            return _cmd_cover(args)
        if args.command in ("simulate", "markov"):
            return _cmd_simulate(args, args.command)
        return _cmd_report(args)
    except (WassboundError, OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
