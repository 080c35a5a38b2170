"""Command-line entry point: ``abcnet-plot <kind> --in <csv> --out <png>``."""

from __future__ import annotations

import argparse
import sys

from plotkit.render import KINDS, PlotJob, SchemaError, render


def _parse_truth(pairs: list[str]) -> dict:
    truth = {}
    for pair in pairs:
        if "=" not in pair:
            raise SchemaError(f"bad --truth entry {pair!r}; expected k=v")
        key, _, value = pair.partition("=")
        try:
            truth[key] = float(value)
        except ValueError:
            raise SchemaError(f"bad --truth value in {pair!r}") from None
    return truth


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abcnet-plot",
        description="Render figures from pipeline CSV artifacts.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_path", required=True,
                        metavar="CSV")
    parser.add_argument("--out", dest="output_path", required=True,
                        metavar="PNG")
    parser.add_argument("--truth", nargs="*", default=[], metavar="K=V",
                        help="truth marker values, e.g. phi=0.093")
    parser.add_argument("--x", dest="x_column", default="avg_degree",
                        help="scatter-smooth x column (default avg_degree)")
    parser.add_argument("--y", dest="y_column", default="slope_used",
                        help="scatter-smooth y column (default slope_used)")
    parser.add_argument("--window", type=float, default=0.25,
                        help="moving-average window (default 0.25)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(kind=args.kind, input_path=args.input_path,
                      output_path=args.output_path,
                      truth=_parse_truth(args.truth),
                      x_column=args.x_column, y_column=args.y_column,
                      window=args.window)
        render(job)
    except SchemaError as exc:
        print(f"abcnet-plot: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
