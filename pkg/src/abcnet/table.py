"""The simulation table: one row per run of (parameters, statistics)."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass
class SimTable:
    param_names: list[str]
    stat_names: list[str]
    params: np.ndarray            # (n_runs, NP)
    stats: np.ndarray             # (n_runs, NS), NaN = missing
    prior_density: np.ndarray     # (n_runs,)
    param_bounds: list[tuple[float, float]]
    run_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.params = np.atleast_2d(np.asarray(self.params, dtype=float))
        self.stats = np.atleast_2d(np.asarray(self.stats, dtype=float))
        self.prior_density = np.asarray(self.prior_density, dtype=float)
        if self.run_ids is None:
            self.run_ids = np.arange(len(self.params))
        if len(self.params) != len(self.stats) or len(self.params) != len(self.prior_density):
            raise ValueError("params, stats and prior_density must share a length")
        if self.params.shape[1] != len(self.param_names):
            raise ValueError("param column count does not match names")
        if self.stats.shape[1] != len(self.stat_names):
            raise ValueError("stat column count does not match names")
        if np.any(self.prior_density <= 0):
            raise ValueError("prior densities must be positive")

    @property
    def n_runs(self) -> int:
        return len(self.params)

    def param_column(self, name: str) -> np.ndarray:
        return self.params[:, self.param_names.index(name)]

    def stat_column(self, name: str) -> np.ndarray:
        return self.stats[:, self.stat_names.index(name)]


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_stats_csv(table: SimTable, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run_id", "prior_density", *table.param_names, *table.stat_names])
        for i in range(table.n_runs):
            w.writerow([
                int(table.run_ids[i]),
                repr(float(table.prior_density[i])),
                *(_fmt(v) for v in table.params[i]),
                *(_fmt(v) for v in table.stats[i]),
            ])


def read_stats_csv(path: str, n_params: int | None = None,
                   param_bounds: list[tuple[float, float]] | None = None) -> SimTable:
    """Read a stats.csv. Parameter columns are found by the `p:` guess:
    when n_params is not given, all columns up to the first canonical
    statistic name are treated as parameters."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        records = list(reader)
    if header[:2] != ["run_id", "prior_density"]:
        raise ValueError(f"unexpected stats header: {header[:2]}")
    names = header[2:]
    if n_params is None:
        from abcnet.sumstats import STAT_NAMES
        from abcnet.citesim import CITATION_STAT_NAMES
        known = set(STAT_NAMES) | set(CITATION_STAT_NAMES)
        n_params = next((i for i, n in enumerate(names) if n in known), len(names))
    param_names = names[:n_params]
    stat_names = names[n_params:]
    run_ids, dens, params, stats = [], [], [], []
    for rec in records:
        run_ids.append(int(rec[0]))
        dens.append(float(rec[1]))
        vals = [float(v) if v != "" else np.nan for v in rec[2:]]
        params.append(vals[:n_params])
        stats.append(vals[n_params:])
    params = np.array(params, dtype=float).reshape(len(records), n_params)
    stats = np.array(stats, dtype=float).reshape(len(records), len(stat_names))
    if param_bounds is None:
        # Fallback scaling bounds from the observed draw range.
        param_bounds = []
        for j in range(n_params):
            lo, hi = float(np.nanmin(params[:, j])), float(np.nanmax(params[:, j]))
            if lo == hi:
                lo, hi = lo - 0.5, hi + 0.5
            param_bounds.append((lo, hi))
    return SimTable(
        param_names=param_names,
        stat_names=stat_names,
        params=params,
        stats=stats,
        prior_density=np.array(dens),
        param_bounds=list(param_bounds),
        run_ids=np.array(run_ids),
    )
