"""Command-line entry point: ``alphavi {gaussian,logreg,collapse,oracle,plot}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..oracles import DIVERGENCES, DivergenceKind, divergence, optimal_scale
from ..targets import gaussian_schedule
from .config import ConfigError, ExperimentConfig, default_output_dir
from .experiments import BaselineRejected, run_gaussian, run_logreg, run_weight_collapse
from .plotting import render_plot

EXPERIMENT_OF = {"gaussian": "gaussian", "logreg": "logreg", "collapse": "weight-collapse"}


def _ints(text):
    return [int(t) for t in text.split(",") if t]


def _add_run_args(p):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="output_dir")
    p.add_argument("--estimator", dest="estimators", type=lambda s: s.split(","),
                   help="comma-separated subset of renyi,rws,stl,chivi,drep")
    p.add_argument("--k", dest="ks", type=_ints, help="comma-separated sample counts")
    p.add_argument("--steps", type=int)
    p.add_argument("--step-size", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--timing", dest="record_timing", action="store_true", default=None)


def build_config(experiment, args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    data["experiment"] = experiment
    skip = {"command", "config", "func", "verbose"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            data[key] = value
    base = ExperimentConfig.for_experiment(experiment).to_dict()
    if not args.config:
        base.update(data)
        data = base
    else:
        data = {**base, **data}
    return ExperimentConfig.from_dict(data)


def _run(args):
    cfg = build_config(EXPERIMENT_OF[args.command], args)
    runner = {"gaussian": run_gaussian, "logreg": run_logreg,
              "weight-collapse": run_weight_collapse}[cfg.experiment]
    result = runner(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    cfg.to_json(os.path.join(cfg.output_dir, f"{args.command}_config.json"))
    for name, path in result["files"].items():
        if path:
            print(f"{name}: {path}")
    failed = [r for r in result.get("final", []) if r.get("status") != "ok"]
    if failed:
        print(f"{len(failed)} cell(s) failed", file=sys.stderr)
    return 0


def _oracle(args):
    kinds = [DivergenceKind(k, args.alpha) for k in DIVERGENCES]
    print("d,divergence,optimal_variance,divergence_at_optimum,divergence_at_init")
    for d in args.dims:
        s2 = gaussian_schedule(d)
        for kind in kinds:
            v = optimal_scale(kind, s2)
            print(f"{d},{kind.tag},{v:.10g},{divergence(kind, v, s2):.10g},"
                  f"{divergence(kind, args.init_variance, s2):.10g}")
    return 0


def _plot(args):
    spec = {}
    if args.spec:
        with open(args.spec) as fh:
            spec = json.load(fh)
    for key in ("x", "y", "group", "title"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    if args.filter:
        spec["filter"] = dict(f.split("=", 1) for f in args.filter)
    if args.baseline:
        spec["baselines"] = [{"value": v, "label": f"{v:g}"} for v in args.baseline]
    if args.logx:
        spec["logx"] = True
    if args.logy:
        spec["logy"] = True
    render_plot(args.csv, spec, args.out)
    print(args.out)
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="alphavi", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gaussian", help="isotropic q against the diagonal Gaussian target")
    _add_run_args(g)
    g.add_argument("--dim", dest="dims", type=_ints)
    g.set_defaults(func=_run)

    lr = sub.add_parser("logreg", help="diagonal q on a logistic-regression posterior")
    _add_run_args(lr)
    lr.add_argument("--dataset", dest="dataset_path")
    lr.add_argument("--prior-variance", type=float)
    lr.set_defaults(func=_run)

    c = sub.add_parser("collapse", help="normalized-weight spectra at initialization")
    _add_run_args(c)
    c.add_argument("--dim", dest="dims", type=_ints)
    c.add_argument("--top", type=int)
    c.set_defaults(func=_run)

    o = sub.add_parser("oracle", help="print optimal isotropic variances")
    o.add_argument("--dim", dest="dims", type=_ints, default=[10, 100, 1000])
    o.add_argument("--alpha", type=float, default=0.5)
    o.add_argument("--init-variance", type=float, default=9.0)
    o.set_defaults(func=_oracle)

    p = sub.add_parser("plot", help="render a result CSV to SVG")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", help="JSON plot spec")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--group")
    p.add_argument("--title")
    p.add_argument("--filter", action="append", help="column=value (repeatable)")
    p.add_argument("--baseline", type=float, action="append")
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    p.set_defaults(func=_plot)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, BaselineRejected, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
