"""Experiment command line.

Subcommands: train, eval, repro, boundary-grid, defaults.
Exit codes: 0 success, 2 config error, 3 training divergence, 4 I/O error.
"""

import argparse
import os
import sys

import numpy as np

from .config import (
    ExperimentConfig,
    default_config,
    parse_config,
    run_experiment,
    serialize_config,
    validate_config,
)
from .errors import ConfigError, DivergenceError
from .metrics import evaluate
from .model_io import atomic_write_text, load_model, save_model
from .suites import SUITES, run_suite
from .training import score


def _load_config(path: str | None, seed_override: int | None, out_override: str | None) -> ExperimentConfig:
    if path is None:
        cfg = default_config()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    if seed_override is not None:
        cfg.seeds = (seed_override,)
    if out_override is not None:
        cfg.out_dir = out_override
    validate_config(cfg)
    return cfg


def _cmd_train(args) -> int:
    cfg = _load_config(args.config, args.seed, args.out)
    record, results = run_experiment(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for res in results:
        save_model(res.model, os.path.join(cfg.out_dir, f"model_seed{res.seed}.bin"))
    atomic_write_text(os.path.join(cfg.out_dir, "run_record.txt"), record.to_text())
    atomic_write_text(os.path.join(cfg.out_dir, "config.ini"), serialize_config(cfg))
    print(record.to_text())
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args.config, args.seed, args.out)
    from .config import build_positives, evaluate_run

    model = load_model(args.model)
    seed = cfg.seeds[0]
    ds = build_positives(cfg.dataset, seed)
    report = evaluate_run(cfg, ds, model, seed)
    text = report.to_text()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        atomic_write_text(os.path.join(args.out, "eval_report.txt"), text)
    print(text)
    return 0


def _cmd_repro(args) -> int:
    seeds = (args.seed,) if args.seed is not None else None
    table = run_suite(args.suite, seeds=seeds)
    text = table.to_text()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        atomic_write_text(os.path.join(args.out, f"{args.suite}.txt"), text)
    print(text)
    return 0


def _cmd_boundary_grid(args) -> int:
    model = load_model(args.model)
    dim = model.input_dim
    if dim not in (2, 10):
        raise ConfigError(f"boundary grid supports input dim 2 or 10, got {dim}")
    lo, hi = args.bounds
    axis = np.linspace(lo, hi, args.resolution)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    if dim == 10:
        full = np.zeros((pts.shape[0], 10))
        full[:, 0] = pts[:, 0]
        full[:, 1] = pts[:, 1]
        pts_in = full
    else:
        pts_in = pts
    scores = score(model, pts_in)
    lines = ["x1,x2,score"]
    for (a, b), s in zip(pts, scores):
        lines.append(f"{a!r},{b!r},{s!r}")
    out_path = args.grid_out
    atomic_write_text(out_path, "\n".join(lines) + "\n")
    print(f"wrote {pts.shape[0]} grid rows to {out_path}")
    return 0


def _cmd_defaults(_args) -> int:
    print(serialize_config(default_config()), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drocc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train per-seed models and write a run record")
    t.add_argument("--config", metavar="PATH")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", metavar="DIR")
    t.set_defaults(func=_cmd_train)

    e = sub.add_parser("eval", help="evaluate a saved model snapshot")
    e.add_argument("--model", required=True, metavar="PATH")
    e.add_argument("--config", metavar="PATH")
    e.add_argument("--seed", type=int)
    e.add_argument("--out", metavar="DIR")
    e.set_defaults(func=_cmd_eval)

    r = sub.add_parser("repro", help="run a canned reproduction suite")
    r.add_argument("--suite", required=True, choices=SUITES)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", metavar="DIR")
    r.set_defaults(func=_cmd_repro)

    b = sub.add_parser("boundary-grid", help="export a decision-boundary score grid as CSV")
    b.add_argument("--model", required=True, metavar="PATH")
    b.add_argument("--bounds", type=float, nargs=2, default=(-2.0, 14.0))
    b.add_argument("--resolution", type=int, default=100)
    b.add_argument("--grid-out", default="boundary_grid.csv", metavar="PATH")
    b.set_defaults(func=_cmd_boundary_grid)

    d = sub.add_parser("defaults", help="print the default config file")
    d.set_defaults(func=_cmd_defaults)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
