"""Command-line entry point.

``opspread run <config> [--set k=v ...] [--out dir] [--seed n] [--threads n]``
runs a sweep and writes results.csv, Krylov CSVs, and manifest.json.
``opspread plot <dir> --panels fidelity,entropy,fisher,rank,krylov`` renders
SVG figures next to the CSV output.

Exit codes: 0 success (warnings allowed), 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .plotting import PANELS, MissingColumnsError, render_panels
from .runner import run_experiment

DEFAULT_OUT_ENV = "OPSPREAD_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opspread",
        description="Operator-spreading tomography and Krylov-complexity runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep from a config file")
    run_p.add_argument("config", type=Path)
    run_p.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE"
    )
    run_p.add_argument("--out", type=Path, default=None)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--threads", type=int, default=None)

    plot_p = sub.add_parser("plot", help="render SVG panels from a run directory")
    plot_p.add_argument("run_dir", type=Path)
    plot_p.add_argument(
        "--panels", default=",".join(PANELS), help="comma-separated panel names"
    )
    return parser


def _parse_overrides(pairs) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _resolve_out(cfg: ExperimentConfig, arg_out) -> Path:
    if arg_out is not None:
        return Path(arg_out)
    if cfg.out:
        return Path(cfg.out)
    env = os.environ.get(DEFAULT_OUT_ENV)
    if env:
        return Path(env)
    return Path("opspread_out")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            overrides = _parse_overrides(args.overrides)
            if args.seed is not None:
                overrides["seed"] = str(args.seed)
            cfg = ExperimentConfig.from_file(args.config, overrides)
            manifest = run_experiment(cfg, _resolve_out(cfg, args.out), args.threads)
            if manifest.warnings:
                print(f"warning: {manifest.warnings} reconstruction(s) "
                      "hit the iteration cap", file=sys.stderr)
            return 0
        panels = [p.strip() for p in args.panels.split(",") if p.strip()]
        unknown = [p for p in panels if p not in PANELS]
        if unknown:
            raise ConfigError(f"unknown panels {unknown}; choose from {PANELS}")
        for path in render_panels(args.run_dir, panels):
            print(path)
        return 0
    except (ConfigError, FileNotFoundError, MissingColumnsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
