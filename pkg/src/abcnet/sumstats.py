"""Summary statistics of a link-traced sample.

Nine canonical statistics are computed per sample: degree means over
several subsets, the sample infection proportion, and four slopes of
per-node quantities against normalized sampling order t in [0, 1].
Missing values propagate as NaN, never as zeros.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from abcnet.linktrace import NodeRow, SampleRecord
from abcnet.table import SimTable

STAT_NAMES = [
    "deg_recruited_mean",
    "deg_reported_mean",
    "deg_infected_mean",
    "deg_diff_infected",
    "infect_prop",
    "slope_degree",
    "slope_depth",
    "slope_used",
    "slope_infect",
]

# IRLS coefficients beyond this magnitude indicate separation.
LOGIT_DIVERGENCE = 30.0


@dataclass
class StatVector:
    names: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.names) != len(self.values):
            raise ValueError("names and values must align")

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict:
        return dict(zip(self.names, (float(v) for v in self.values)))


def pr_link_used(row: NodeRow) -> float:
    """Share of a node's usable links that produced recruitment.

    Recruited nodes exclude their inbound edge from the denominator;
    seeds have no inbound edge. NaN when the denominator is zero.
    """
    denom = row.pop_degree if row.is_leap else row.pop_degree - 1
    if denom <= 0:
        return float("nan")
    return row.links_recruited / denom


def weighted_slope(t, y, weights) -> float:
    """Weighted least-squares slope of y on t. NaN when degenerate."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    keep = ~(np.isnan(t) | np.isnan(y) | np.isnan(w)) & (w > 0)
    t, y, w = t[keep], y[keep], w[keep]
    if len(t) < 2:
        return float("nan")
    wsum = w.sum()
    tbar = (w * t).sum() / wsum
    ybar = (w * y).sum() / wsum
    stt = (w * (t - tbar) ** 2).sum()
    if stt == 0:
        return float("nan")
    return float((w * (t - tbar) * (y - ybar)).sum() / stt)


def log_odds_slope(t, successes, trials) -> float:
    """Slope of a binomial logistic regression of successes/trials on t.

    Fitted by iteratively reweighted least squares; NaN on separation
    (coefficients diverging past LOGIT_DIVERGENCE) or degenerate input.
    """
    t = np.asarray(t, dtype=float)
    k = np.asarray(successes, dtype=float)
    n = np.asarray(trials, dtype=float)
    keep = ~np.isnan(t) & (n > 0)
    t, k, n = t[keep], k[keep], n[keep]
    if len(t) < 2 or k.sum() == 0 or (n - k).sum() == 0:
        return float("nan")
    if np.all(t == t[0]):
        return float("nan")
    X = np.column_stack([np.ones_like(t), t])
    beta = np.zeros(2)
    for _ in range(100):
        eta = X @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = n * mu * (1.0 - mu)
        w = np.maximum(w, 1e-12)
        z = eta + (k - n * mu) / w
        xtw = X.T * w
        new = np.linalg.solve(xtw @ X, xtw @ z)
        step = np.max(np.abs(new - beta))
        beta = new
        if np.max(np.abs(beta)) > LOGIT_DIVERGENCE:
            return float("nan")
        if step < 1e-10 * (1.0 + np.max(np.abs(beta))):
            break
    else:
        return float("nan")
    return float(beta[1])


def compute_stats(record: SampleRecord) -> StatVector:
    """Compute the nine canonical statistics; depth must be filled."""
    rows = record.rows
    n = len(rows)
    deg = np.array([r.pop_degree for r in rows], dtype=float)
    infected = np.array([r.infected for r in rows], dtype=bool)
    leap = np.array([r.is_leap for r in rows], dtype=bool)
    depth = np.array([np.nan if r.depth is None else r.depth for r in rows])
    used = np.array([pr_link_used(r) for r in rows])
    t = np.arange(n) / (n - 1) if n > 1 else np.zeros(n)

    def mean_or_nan(x):
        return float(np.mean(x)) if len(x) else float("nan")

    deg_recruited = mean_or_nan(deg[~leap])
    deg_reported = mean_or_nan(deg)
    deg_infected = mean_or_nan(deg[infected])
    if infected.any() and (~infected).any():
        deg_diff = float(np.mean(deg[infected]) - np.mean(deg[~infected]))
    else:
        deg_diff = float("nan")
    infect_prop = float(np.mean(infected))
    ones = np.ones(n)
    slope_degree = weighted_slope(t, deg, ones)
    slope_depth = weighted_slope(t, depth, ones)
    slope_used = weighted_slope(t, used, deg)
    slope_infect = log_odds_slope(t, infected.astype(float), ones)

    return StatVector(
        names=list(STAT_NAMES),
        values=np.array([
            deg_recruited, deg_reported, deg_infected, deg_diff, infect_prop,
            slope_degree, slope_depth, slope_used, slope_infect,
        ]),
    )


@dataclass
class ScreeningReport:
    param_names: list[str]
    stat_names: list[str]
    f_stat: np.ndarray    # (NP, NS), NaN where skipped
    r_squared: np.ndarray

    def best_statistic(self, param: str) -> tuple[str, float]:
        """Name and R^2 of the best-fitting statistic for a parameter."""
        i = self.param_names.index(param)
        r2 = self.r_squared[i]
        if np.all(np.isnan(r2)):
            return "", float("nan")
        j = int(np.nanargmax(r2))
        return self.stat_names[j], float(r2[j])

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["parameter", "statistic", "F", "R2"])
            for i, p in enumerate(self.param_names):
                for j, s in enumerate(self.stat_names):
                    f = self.f_stat[i, j]
                    r = self.r_squared[i, j]
                    w.writerow([p, s,
                                "" if np.isnan(f) else repr(float(f)),
                                "" if np.isnan(r) else repr(float(r))])


def cubic_fit(x: np.ndarray, y: np.ndarray):
    """OLS on (1, x, x^2, x^3); returns (coef, r_squared, f_stat, n)."""
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    n = len(x)
    if n < 5 or np.all(x == x[0]):
        return None
    X = np.column_stack([np.ones(n), x, x * x, x ** 3])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    if tss == 0:
        return coef, 1.0, float("inf"), n
    r2 = 1.0 - rss / tss
    if rss == 0:
        return coef, r2, float("inf"), n
    f = ((tss - rss) / 3.0) / (rss / (n - 4))
    return coef, r2, f, n


def cubic_screen(sims: SimTable) -> ScreeningReport:
    """Cubic regressions of each parameter on each statistic."""
    np_, ns = len(sims.param_names), len(sims.stat_names)
    f = np.full((np_, ns), np.nan)
    r2 = np.full((np_, ns), np.nan)
    for i in range(np_):
        y = sims.params[:, i]
        for j in range(ns):
            fit = cubic_fit(sims.stats[:, j], y)
            if fit is None:
                continue
            _, r2[i, j], f[i, j], _ = fit
    return ScreeningReport(
        param_names=list(sims.param_names),
        stat_names=list(sims.stat_names),
        f_stat=f,
        r_squared=r2,
    )


def moving_average_curve(x, y, window: float, grid=None):
    """Centered moving average of y over an x-axis window.

    Returns (grid, smoothed); grid points with an empty window are
    dropped. Defaults to evaluating at the sorted x values.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    if grid is None:
        grid = np.sort(x)
    grid = np.asarray(grid, dtype=float)
    half = window / 2.0
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    csum = np.concatenate([[0.0], np.cumsum(ys)])
    lo = np.searchsorted(xs, grid - half, side="left")
    hi = np.searchsorted(xs, grid + half, side="right")
    counts = hi - lo
    ok = counts > 0
    smooth = np.full(len(grid), np.nan)
    smooth[ok] = (csum[hi[ok]] - csum[lo[ok]]) / counts[ok]
    return grid[ok], smooth[ok]
