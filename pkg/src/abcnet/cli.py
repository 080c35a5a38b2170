"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 round failure.
"""

from __future__ import annotations

import argparse
import sys

from abcnet import pipeline
from abcnet.pipeline import ConfigError, RoundError


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--runs", type=int, help="override n_runs")
    p.add_argument("--threads", type=int, help="override worker count")
    p.add_argument("--out", help="override output directory")


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["master_seed"] = args.seed
    if args.runs is not None:
        out["n_runs"] = args.runs
    if args.threads is not None:
        out["threads"] = args.threads
    if getattr(args, "out", None):
        out["output_dir"] = args.out
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abcnet",
        description="ABC inference for networked populations from "
                    "link-traced samples",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation round")
    sim.add_argument("--config", required=True)
    _add_overrides(sim)

    cite = sub.add_parser("cite-simulate",
                          help="run a citation-model simulation round")
    cite.add_argument("--config", required=True)
    _add_overrides(cite)

    screen = sub.add_parser("screen",
                            help="cubic screening and prior suggestions")
    screen.add_argument("--stats", required=True)
    screen.add_argument("--observed", required=True)
    screen.add_argument("--config", help="config supplying the current prior")
    screen.add_argument("--out", help="directory for screening.csv")

    inf = sub.add_parser("infer", help="conditional KDE posterior artifacts")
    inf.add_argument("--stats", required=True)
    inf.add_argument("--observed", required=True)
    inf.add_argument("--out", required=True)
    inf.add_argument("--config", help="config supplying grid options")
    return parser


def cmd_simulate(args, force_model: str | None = None) -> int:
    config = pipeline.load_config(args.config, overrides=_overrides(args))
    if force_model and config.model != force_model:
        raise ConfigError(
            f"cite-simulate requires model = {force_model}, got {config.model}")
    table = pipeline.run_round(config)
    print(f"completed {table.n_runs}/{config.n_runs} runs"
          + (f" -> {config.output_dir}" if config.output_dir else ""))
    return 0


def cmd_screen(args) -> int:
    import os

    table = pipeline.load_table(args.stats)
    observed = pipeline.read_observed_csv(args.observed)
    if args.config:
        prior = pipeline.load_config(args.config).prior
    else:
        # Reconstruct a flat prior over the table bounds for suggestions.
        from abcnet.priors import PriorSpec, Uniform, PriorEntry
        prior = PriorSpec([
            PriorEntry(n, Uniform(lo, hi), lo, hi)
            for n, (lo, hi) in zip(table.param_names, table.param_bounds)
        ])
    report, suggested = pipeline.screen_and_update(table, observed, prior)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report.write_csv(os.path.join(args.out, "screening.csv"))
    for i, name in enumerate(report.param_names):
        stat, r2 = report.best_statistic(name)
        entry = suggested.entries[i]
        print(f"{name}: best statistic {stat or '-'} (R2 = {r2:.3f}); "
              f"suggested prior {entry.dist!r}")
    return 0


def cmd_infer(args) -> int:
    table = pipeline.load_table(args.stats)
    observed = pipeline.read_observed_csv(args.observed)
    if args.config:
        config = pipeline.load_config(args.config,
                                      overrides={"output_dir": args.out})
    else:
        from abcnet.priors import PriorSpec, Uniform, PriorEntry
        prior = PriorSpec([
            PriorEntry(n, Uniform(lo, hi), lo, hi)
            for n, (lo, hi) in zip(table.param_names, table.param_bounds)
        ])
        from abcnet.citesim import CITATION_STAT_NAMES
        model = ("citation" if set(table.stat_names) == set(CITATION_STAT_NAMES)
                 else "linktrace")
        config = pipeline.RunConfig(model=model, prior=prior, n_runs=2,
                                    output_dir=args.out)
    summaries = pipeline.infer(table, observed, config)
    for s in summaries:
        print(f"{s['parameter']}: mean {s['mean']:.4g}, mode {s['mode']:.4g}, "
              f"{s['level']:.0%} HDR [{s['hdr_lo']:.4g}, {s['hdr_hi']:.4g}]")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "cite-simulate":
            return cmd_simulate(args, force_model="citation")
        if args.command == "screen":
            return cmd_screen(args)
        if args.command == "infer":
            return cmd_infer(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RoundError as exc:
        print(f"round failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
