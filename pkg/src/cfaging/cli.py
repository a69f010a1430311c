"""Command-line entry point for running spectral-efficiency sweeps."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import SystemConfig, config_from_dict, config_to_dict, load_config
from .errors import (
    ConfigError,
    DegenerateInputError,
    InvalidParameterError,
    RankDeficiencyError,
)
from .runner import ScenarioSpec, run_experiment, write_results

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_float_list(text: str) -> tuple[float, ...]:
    if not text.strip():
        return ()
    return tuple(float(tok) for tok in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description=(
            "Monte Carlo downlink spectral-efficiency sweep for a cell-free "
            "massive-MIMO system under channel aging."
        ),
    )
    parser.add_argument("--config", help="JSON configuration file (defaults built in)")
    parser.add_argument("--scenario", default="all", help="scenario label to run, or 'all'")
    parser.add_argument("--drops", type=int, default=200, help="drops per scenario")
    parser.add_argument("--inner", type=int, default=200, help="inner expectation draws per drop")
    parser.add_argument("--seed", type=int, default=1, help="master seed")
    parser.add_argument("--out", default="out", help="output directory for CSV files")
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    parser.add_argument(
        "--velocities", default="30,50,120", help="comma-separated velocity grid in km/h"
    )
    parser.add_argument(
        "--phase-labels", default="30,90,150", help="comma-separated phase-noise labels in degrees"
    )
    parser.add_argument(
        "--benchmark",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="include the stationary zero-phase-noise baseline scenario",
    )
    parser.add_argument(
        "--perfect-csi",
        action="store_true",
        help="also run the idealized scenario with exact channel knowledge",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration field (VALUE parsed as JSON); repeatable",
    )
    return parser


def _apply_overrides(config: SystemConfig, overrides: list[str]) -> SystemConfig:
    if not overrides:
        return config
    data = config_to_dict(config)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        if key == "delay_total_s":
            data.pop("delay_budget", None)
        elif key == "delay_budget":
            data.pop("delay_total_s", None)
        try:
            data[key] = json.loads(value)
        except json.JSONDecodeError:
            data[key] = value
    return config_from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else SystemConfig()
        config = _apply_overrides(config, args.overrides)
        spec = ScenarioSpec(
            velocities=_parse_float_list(args.velocities),
            phase_labels=_parse_float_list(args.phase_labels),
            include_benchmark=args.benchmark,
            include_perfect_csi=args.perfect_csi,
            n_drops=args.drops,
            n_inner=args.inner,
            seed=args.seed,
        )
    except (ConfigError, InvalidParameterError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(config, spec, workers=args.workers, scenario_filter=args.scenario)
    except InvalidParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RankDeficiencyError, DegenerateInputError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for diag in result.diagnostics:
        print(
            f"scenario {diag.scenario!r} aborted at drop {diag.drop}: {diag.error}",
            file=sys.stderr,
        )
    results_path, summary_path = write_results(result.rows, args.out, result.summaries)
    print(f"wrote {results_path} ({len(result.rows)} rows) and {summary_path}")
    for s in result.summaries:
        print(
            f"  {s.scenario}: 5%-likely {s.q05_bpshz:.3f} bit/s/Hz, "
            f"median {s.q50_bpshz:.3f} bit/s/Hz ({s.n_samples} samples)"
        )
    return EXIT_NUMERICAL if result.diagnostics else EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
