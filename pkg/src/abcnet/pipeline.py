"""Two-round ABC workflow: configuration, execution, persistence.

Runs are independent and reproducible one at a time: run i uses the
random stream `default_rng(SeedSequence(master_seed, spawn_key=(i,)))`.
Results are collected in run-index order so serial and pooled execution
produce identical artifacts.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np
from scipy import stats as sps

from abcnet import citesim, linktrace, netgen, sumstats
from abcnet.kde import ConditionalKernelDensity, write_posterior_csv
from abcnet.priors import PriorSpec, Uniform, PriorEntry
from abcnet.sumstats import ScreeningReport, StatVector, cubic_fit
from abcnet.table import SimTable, read_stats_csv, write_stats_csv

LINKTRACE_PARAMS = ["avg_degree", "n_nodes", "init_infect", "transmission", "closeness"]

# Round fails when more than this share of runs error out.
FAILURE_TOLERANCE = 0.10


class ConfigError(Exception):
    pass


class RoundError(Exception):
    pass


@dataclass
class RunConfig:
    model: str                     # "linktrace" | "citation"
    prior: PriorSpec
    n_runs: int
    master_seed: int = 0
    output_dir: str | None = None
    round_label: str = "round"
    threads: int = 1
    # linktrace model
    n_samp: int = 400
    pr_response: float = 1.0
    order: str = "fifo"
    save_samples: bool = False
    # citation model
    case_table: citesim.CaseTable | None = None
    seed_history: citesim.CitationHistory | None = None
    # inference
    conditioned_statistics: list = field(default_factory=list)
    resolution: int = 64
    level: float = 0.95
    slice: str = "marginalize"

    def __post_init__(self):
        if self.model not in ("linktrace", "citation"):
            raise ConfigError(f"unknown model: {self.model!r}")
        if self.n_runs < 2:
            raise ConfigError(f"n_runs must be >= 2, got {self.n_runs}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        stat_set = self.stat_names
        for s in self.conditioned_statistics:
            if s not in stat_set:
                raise ConfigError(f"unknown conditioned statistic: {s!r}")
        if self.model == "linktrace":
            missing = [n for n in LINKTRACE_PARAMS if n not in self.prior.names]
            if missing:
                raise ConfigError(f"linktrace prior must define {missing}")
        if self.model == "citation" and self.case_table is None:
            self.case_table = citesim.default_case_table()

    @property
    def stat_names(self) -> list[str]:
        if self.model == "citation":
            return list(citesim.CITATION_STAT_NAMES)
        return list(sumstats.STAT_NAMES)


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """The documented seed-splitting rule."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,)))


def simulate_one(config: RunConfig, run_index: int):
    """One full pipeline run; returns (values, prior_density, stats)."""
    rng = run_rng(config.master_seed, run_index)
    pset = config.prior.draw(rng)
    if config.model == "linktrace":
        values = dict(zip(config.prior.names, pset.values))
        params = netgen.PopulationParams(
            avg_degree=values["avg_degree"],
            n_nodes=int(round(values["n_nodes"])),
            p_infect=values["init_infect"],
            p_transmit=values["transmission"],
            gamma=values["closeness"],
        )
        graph = netgen.generate_population(params, rng)
        record = linktrace.link_trace_sample(
            graph, config.n_samp, config.pr_response, rng, order=config.order)
        linktrace.node_depth(record)
        sv = sumstats.compute_stats(record)
        if config.save_samples and config.output_dir:
            path = os.path.join(config.output_dir, f"sample_{run_index:05d}.csv")
            linktrace.write_csv(record, path)
    else:
        values = dict(zip(config.prior.names, pset.values))
        aparams = citesim.AttractParams(
            b_irrel=values.get("b_irrel", 0.0),
            b_pa=values.get("b_pa", 0.0),
            b_corp=values.get("b_corp", 0.0),
            b_crown=values.get("b_crown", 0.0),
            b_dissent=values.get("b_dissent", 0.0),
        )
        history = citesim.simulate_history(
            aparams, config.case_table, rng, seed_history=config.seed_history)
        sv = citesim.citation_stats(history)
    return pset.values, pset.prior_density, sv.values


def _pool_worker(args):
    config, run_index = args
    try:
        return run_index, simulate_one(config, run_index), None
    except Exception as exc:  # per-run failures are tolerated up to a share
        return run_index, None, f"{type(exc).__name__}: {exc}"


def run_round(config: RunConfig) -> SimTable:
    """Execute n_runs independent simulations and persist artifacts."""
    jobs = [(config, i) for i in range(config.n_runs)]
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
    if config.threads > 1:
        with Pool(config.threads) as pool:
            results = pool.map(_pool_worker, jobs)
    else:
        results = [_pool_worker(j) for j in jobs]

    failures = [(i, err) for i, _, err in results if err is not None]
    if len(failures) > FAILURE_TOLERANCE * config.n_runs:
        raise RoundError(
            f"{len(failures)}/{config.n_runs} runs failed; first: {failures[0]}")

    kept = [(i, payload) for i, payload, err in results if err is None]
    run_ids = np.array([i for i, _ in kept])
    params = np.array([list(p[0]) for _, p in kept], dtype=float)
    dens = np.array([p[1] for _, p in kept], dtype=float)
    stat_rows = np.array([p[2] for _, p in kept], dtype=float)
    table = SimTable(
        param_names=config.prior.names,
        stat_names=config.stat_names,
        params=params,
        stats=stat_rows,
        prior_density=dens,
        param_bounds=config.prior.bounds,
        run_ids=run_ids,
    )
    if config.output_dir:
        write_stats_csv(table, os.path.join(config.output_dir, "stats.csv"))
        _write_bounds_csv(config, os.path.join(config.output_dir, "bounds.csv"))
        if failures:
            with open(os.path.join(config.output_dir, "failures.csv"), "w",
                      newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["run_id", "error"])
                w.writerows(failures)
    return table


def _write_bounds_csv(config: RunConfig, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["parameter", "pmin", "pmax"])
        for name, (lo, hi) in zip(config.prior.names, config.prior.bounds):
            w.writerow([name, repr(lo), repr(hi)])


def read_bounds_csv(path: str) -> list[tuple[float, float]]:
    bounds = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            bounds.append((float(rec["pmin"]), float(rec["pmax"])))
    return bounds


def screen_and_update(
    table: SimTable,
    observed,
    old_prior: PriorSpec,
    r2_threshold: float = 0.5,
    level: float = 0.99,
) -> tuple[ScreeningReport, PriorSpec]:
    """Cubic screening plus advisory prior suggestions.

    For each parameter whose best statistic reaches the R^2 threshold,
    the suggested interval is that cubic model's prediction interval at
    the observed statistic value, clipped to the old prior bounds. The
    suggestions do not replace the operator's next-round config.
    """
    if isinstance(observed, StatVector):
        observed = observed.as_dict()
    report = sumstats.cubic_screen(table)
    entries = []
    for i, name in enumerate(old_prior.names):
        old = old_prior.entries[i]
        best_stat, best_r2 = report.best_statistic(name)
        suggestion = None
        if best_stat and not math.isnan(best_r2) and best_r2 >= r2_threshold \
                and best_stat in observed:
            suggestion = _prediction_interval(
                table.stat_column(best_stat), table.param_column(name),
                float(observed[best_stat]), level)
        if suggestion is None:
            entries.append(old)
            continue
        lo = max(suggestion[0], old.pmin)
        hi = min(suggestion[1], old.pmax)
        if not lo < hi:
            entries.append(old)
            continue
        entries.append(PriorEntry(name, Uniform(lo, hi), lo, hi))
    return report, PriorSpec(entries)


def _prediction_interval(x, y, x0: float, level: float):
    fit = cubic_fit(np.asarray(x, float), np.asarray(y, float))
    if fit is None:
        return None
    coef, _, _, n = fit
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = np.asarray(x, float)[keep], np.asarray(y, float)[keep]
    X = np.column_stack([np.ones(n), x, x * x, x ** 3])
    resid = y - X @ coef
    dof = n - 4
    if dof <= 0:
        return None
    s2 = float(resid @ resid) / dof
    row = np.array([1.0, x0, x0 * x0, x0 ** 3])
    xtx_inv = np.linalg.pinv(X.T @ X)
    se = math.sqrt(s2 * (1.0 + row @ xtx_inv @ row))
    t = float(sps.t.ppf(0.5 + level / 2.0, dof))
    center = float(row @ coef)
    return center - t * se, center + t * se


def infer(table: SimTable, observed, config: RunConfig) -> list[dict]:
    """Fit the conditional KDE and emit posterior artifacts."""
    model = ConditionalKernelDensity(
        statistics=config.conditioned_statistics or None,
        slice=config.slice,
    ).fit(table)
    summaries = model.posterior_summaries(observed, level=config.level)
    out = config.output_dir
    if out:
        os.makedirs(out, exist_ok=True)
        write_posterior_csv(summaries, os.path.join(out, "posterior.csv"))
        names = model.param_names_
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                grid = model.conditional_grid(
                    observed, [names[i], names[j]], config.resolution)
                grid.write_csv(os.path.join(
                    out, f"grid2d_{names[i]}_{names[j]}.csv"))
        if config.model == "citation":
            est = citesim.abc_estimate(table, observed)
            with open(os.path.join(out, "estimate.csv"), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["parameter", "estimate"])
                for k, v in est.items():
                    w.writerow([k, repr(v)])
    return summaries


# -- configuration files ---------------------------------------------------

def read_observed_csv(path: str) -> dict:
    out = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out[rec["statistic"]] = float(rec["value"])
    return out


def write_observed_csv(observed: dict, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["statistic", "value"])
        for k, v in observed.items():
            if not (isinstance(v, float) and math.isnan(v)):
                w.writerow([k, repr(float(v))])


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    """Parse a sectioned key-value config file into a RunConfig."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file: {path}")
    overrides = overrides or {}
    try:
        run = parser["run"]
        model = run.get("model", "linktrace")
        bounds = {}
        if parser.has_section("prior.bounds"):
            for name, text in parser["prior.bounds"].items():
                lo, hi = (float(v) for v in text.split(","))
                bounds[name] = (lo, hi)
        if not parser.has_section("prior"):
            raise ConfigError("config needs a [prior] section")
        prior = PriorSpec.from_pairs(list(parser["prior"].items()), bounds=bounds)
        cond = []
        if parser.has_option("statistics", "conditioned"):
            cond = [s.strip() for s in
                    parser.get("statistics", "conditioned").split(",") if s.strip()]
        case_table = None
        seed_history = None
        if parser.has_section("citation"):
            sec = parser["citation"]
            if sec.get("case_table"):
                case_table = citesim.CaseTable.read_csv(sec.get("case_table"))
            if sec.get("citations") and sec.get("counts"):
                seed_history = citesim.read_history_csv(
                    sec.get("citations"), sec.get("counts"))
        cfg = RunConfig(
            model=model,
            prior=prior,
            n_runs=int(overrides.get("n_runs", run.get("n_runs", 100))),
            master_seed=int(overrides.get("master_seed", run.get("master_seed", 0))),
            output_dir=overrides.get("output_dir", run.get("output_dir")),
            round_label=run.get("round", "round"),
            threads=int(overrides.get("threads", run.get("threads", 1))),
            n_samp=parser.getint("sample", "n_samp", fallback=400),
            pr_response=parser.getfloat("sample", "pr_response", fallback=1.0),
            order=parser.get("sample", "order", fallback="fifo"),
            save_samples=parser.getboolean("sample", "save_samples", fallback=False),
            case_table=case_table,
            seed_history=seed_history,
            conditioned_statistics=cond,
            resolution=parser.getint("grid", "resolution", fallback=64),
            level=parser.getfloat("grid", "level", fallback=0.95),
            slice=parser.get("grid", "slice", fallback="marginalize"),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    return cfg


def load_table(stats_path: str) -> SimTable:
    """Read a stats.csv, picking up bounds.csv from the same directory."""
    bounds = None
    sidecar = os.path.join(os.path.dirname(os.path.abspath(stats_path)),
                           "bounds.csv")
    if os.path.exists(sidecar):
        bounds = read_bounds_csv(sidecar)
    n_params = len(bounds) if bounds is not None else None
    return read_stats_csv(stats_path, n_params=n_params, param_bounds=bounds)
