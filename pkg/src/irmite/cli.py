"""Command-line entry points.

Subcommands: generate (emit a dataset CSV), run (single config),
sweep-accuracy, sweep-dimension, plot.  Exit codes: 0 success, 1 config
error, 2 when the results CSV contains failed-estimator rows.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .datagen import generate
from .errors import InvalidArg, IrmIteError, SchemaError


def _load_config(args) -> harness.ExperimentConfig:
    try:
        with open(args.config) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArg(f"cannot load config {args.config}: {exc}") from exc
    cfg = harness.ExperimentConfig.from_dict(obj)
    if args.seed is not None:
        cfg.root_seed = args.seed
    if getattr(args, "reps", None) is not None:
        cfg.reps = args.reps
    return cfg


def _write_records(records, out_path, timing) -> int:
    harness.write_csv(records, out_path, timing=timing)
    return 2 if any(r.error for r in records) else 0


def _cmd_generate(args) -> int:
    cfg = _load_config(args)
    train, test, _params, _cov = generate(cfg.root_seed, cfg.spec, cfg.n_tr, cfg.n_te)
    ds = test if args.which == "test" else train
    ds.to_csv(args.out)
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    return _write_records(harness.run(cfg), args.out, cfg.timing)


def _cmd_sweep_accuracy(args) -> int:
    cfg = _load_config(args)
    return _write_records(harness.sweep_accuracy(cfg), args.out, cfg.timing)


def _cmd_sweep_dimension(args) -> int:
    cfg = _load_config(args)
    return _write_records(harness.sweep_dimension(cfg), args.out, cfg.timing)


def _cmd_plot(args) -> int:
    harness.plot(args.csv, args.kind, args.out)
    return 0


def _add_config_flags(sub):
    sub.add_argument("--config", required=True, help="JSON experiment config")
    sub.add_argument("--seed", type=int, default=None, help="override root seed")
    sub.add_argument("--out", required=True, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irmite",
        description="ITE estimation with invariant risk minimization over "
                    "artificially split domains")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("generate", help="emit a synthetic dataset CSV")
    _add_config_flags(p)
    p.add_argument("--which", choices=("train", "test"), default="train")
    p.set_defaults(func=_cmd_generate)

    for name, func, help_text in (
            ("run", _cmd_run, "run a single configuration"),
            ("sweep-accuracy", _cmd_sweep_accuracy, "group-separation sweep"),
            ("sweep-dimension", _cmd_sweep_dimension, "feature-dimension sweep")):
        p = subs.add_parser(name, help=help_text)
        _add_config_flags(p)
        p.add_argument("--reps", type=int, default=None, help="override repetitions")
        p.set_defaults(func=func)

    p = subs.add_parser("plot", help="render a results CSV as SVG")
    p.add_argument("csv", help="results CSV path")
    p.add_argument("--kind", choices=("accuracy", "dimension"), required=True)
    p.add_argument("--out", required=True, help="SVG output path")
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidArg as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except IrmIteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
