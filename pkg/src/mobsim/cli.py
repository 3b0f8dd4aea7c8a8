"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 data error,
4 infeasible seeding.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import yaml

from .config import ConfigError, ExperimentConfig, load_config
from .engine import SimulationError
from .experiment import (
    RUN_FILES,
    default_workers,
    run_compare,
    run_experiment,
    run_ingest,
    run_sweep,
)
from .ingest import IngestError

EXIT_CONFIG, EXIT_DATA, EXIT_SEEDS = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="experiment YAML file")
    common.add_argument("--out", type=Path, help="output directory (overrides outputs.directory)")
    common.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    common.add_argument("--rng-seed", type=int, default=None, help="override seeds.rng_seed")
    common.add_argument("--quiet", action="store_true")

    p = _Parser(prog="mobsim", description="Mobility-driven epidemic simulation")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="run an ensemble")
    sw = sub.add_parser("sweep", parents=[common], help="run one ensemble per parameter value")
    sw.add_argument("--param", required=True)
    sw.add_argument("--values", required=True, help="comma-separated values")
    sub.add_parser("compare", parents=[common], help="compare against graph / homogeneous baselines")
    sub.add_parser("ingest", parents=[common], help="preprocess the dataset into event files")
    sub.add_parser("validate", parents=[common], help="check the configuration only")
    return p


def _prepare(args) -> tuple[ExperimentConfig, Path, int]:
    cfg = load_config(args.config)
    if args.rng_seed is not None:
        if args.rng_seed < 0 or args.rng_seed >= 2**64:
            raise ConfigError("--rng-seed must be an unsigned 64-bit integer")
        cfg.seeds["rng_seed"] = args.rng_seed
    out = args.out
    if out is None:
        out = Path(cfg.outputs["directory"])
        if not out.is_absolute():
            out = cfg.base_dir / out
    workers = args.workers if args.workers is not None else default_workers()
    return cfg, out, max(1, workers)


def _parse_values(text: str) -> list:
    values = [yaml.safe_load(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values is empty")
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    say = (lambda *a: None) if args.quiet else (lambda *a: print(*a))
    try:
        cfg, out, workers = _prepare(args)
        if args.command == "validate":
            say(f"{args.config}: ok (hash {cfg.hash()})")
        elif args.command == "run":
            summary = run_experiment(cfg, out, workers)
            say(json.dumps(dataclasses.asdict(summary), indent=2))
            say(f"wrote {', '.join(RUN_FILES)} to {out}")
        elif args.command == "sweep":
            values = _parse_values(args.values)
            summaries = run_sweep(cfg, args.param, values, out, workers)
            for v, s in zip(values, summaries):
                say(f"{args.param}={v}: final={s.final_total_median:g} ({s.final_fraction:.1%}) "
                    f"peak day {s.peak_day}")
        elif args.command == "compare":
            report = run_compare(cfg, out, workers)
            say(json.dumps(report, indent=2))
        elif args.command == "ingest":
            for p in run_ingest(cfg, out):
                say(f"wrote {p}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SEEDS
    except (IngestError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # invalid sweep values end up here, e.g. a fraction outside [0, 1]
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
