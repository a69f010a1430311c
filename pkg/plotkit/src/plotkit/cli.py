"""Command-line figure emitter: `plot cdf|percentiles --in ... --out ...`."""

from __future__ import annotations

import argparse
import sys

from .figures import PERCENTILE_VS_PHASE, PERCENTILE_VS_RHO, plot_cdf, plot_percentiles
from .io import MissingScenarioError, SchemaError

EXIT_OK = 0
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot", description="Render result CSVs as figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    cdf = sub.add_parser("cdf", help="per-user rate CDF, one curve per scenario")
    cdf.add_argument("--in", dest="input", required=True, help="results CSV")
    cdf.add_argument("--out", dest="output", required=True, help="output image path")
    cdf.add_argument("--scenarios", help="comma-separated scenario labels (default: all)")
    cdf.add_argument("--x-min", type=float)
    cdf.add_argument("--x-max", type=float)
    cdf.add_argument("--dpi", type=int, default=200)

    pct = sub.add_parser("percentiles", help="5%%-likely and median vs the sweep variable")
    pct.add_argument("--in", dest="input", required=True, help="results or summary CSV")
    pct.add_argument("--out", dest="output", required=True, help="output image path")
    pct.add_argument(
        "--kind",
        choices=("rho", "phase"),
        default="rho",
        help="sweep variable: correlation coefficient or phase-drift label",
    )
    pct.add_argument("--scenarios", help="comma-separated scenario labels")
    pct.add_argument("--dpi", type=int, default=200)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    scenarios = tuple(args.scenarios.split(",")) if args.scenarios else None
    try:
        if args.command == "cdf":
            x_range = None
            if args.x_min is not None or args.x_max is not None:
                x_range = (args.x_min or 0.0, args.x_max)
            figure = plot_cdf(
                args.input, scenarios=scenarios, output=args.output,
                x_range=x_range, dpi=args.dpi,
            )
        else:
            kind = PERCENTILE_VS_RHO if args.kind == "rho" else PERCENTILE_VS_PHASE
            figure = plot_percentiles(
                args.input, kind, scenarios=scenarios, output=args.output, dpi=args.dpi
            )
    except (SchemaError, MissingScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print("wrote " + " and ".join(figure.paths))
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
