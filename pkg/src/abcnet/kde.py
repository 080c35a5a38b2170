"""Prior-weighted Gaussian kernel density over (parameters, statistics).

Simulation points are scaled to the unit hypercube (parameters by their
assumed bounds, statistics by uniform method-of-moments bounds), kernel
weights are set to inverse prior densities, and the density is
conditioned on observed statistic values to yield parameter grids,
marginals, means and highest-density credible intervals.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from abcnet.table import SimTable
from abcnet.sumstats import StatVector

BANDWIDTH_FLOOR = 1e-4


def scott_factor(n_runs: int, n_dims: int) -> float:
    """Dimension-aware bandwidth scaling factor."""
    return float(n_runs) ** (-1.0 / (n_dims + 4))


def lattice_size(n_grid_cells: int, n_free_dims: int, budget: int = 10_000_000) -> int:
    """Per-dimension lattice points for marginalizing free dimensions,
    chosen so the equivalent brute-force evaluation count stays within
    budget."""
    if n_free_dims == 0:
        return 0
    m = int((budget / max(n_grid_cells, 1)) ** (1.0 / n_free_dims))
    return max(2, min(m, 64))


@dataclass
class DensityGrid:
    axes: list[tuple[str, np.ndarray]]
    density: np.ndarray
    normalization: float

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if len(self.axes) == 1:
                name, vals = self.axes[0]
                w.writerow(["parameter", "value", "density"])
                for v, d in zip(vals, self.density):
                    w.writerow([name, repr(float(v)), repr(float(d))])
            else:
                (na, va), (nb, vb) = self.axes
                w.writerow(["param_a", "param_b", "value_a", "value_b", "density"])
                for i, a in enumerate(va):
                    for j, b in enumerate(vb):
                        w.writerow([na, nb, repr(float(a)), repr(float(b)),
                                    repr(float(self.density[i, j]))])


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x)
    w[1:] += np.diff(x) / 2.0
    w[:-1] += np.diff(x) / 2.0
    return w


class ConditionalKernelDensity(BaseEstimator):
    """Weighted product-Gaussian KDE conditioned on observed statistics.

    Parameters
    ----------
    statistics : list of str or None
        Statistic names to condition on; None keeps every statistic in
        the fitted table.
    slice : {"marginalize", "fix-at-mode"}
        How non-plotted parameter dimensions are removed from grids.
    eval_budget : int
        Cap on the equivalent brute-force evaluation count when
        marginalizing over a lattice.
    bandwidth_floor : float
        Lower bound for every per-dimension bandwidth.
    """

    def __init__(self, statistics=None, slice="marginalize",
                 eval_budget=10_000_000, bandwidth_floor=BANDWIDTH_FLOOR):
        self.statistics = statistics
        self.slice = slice
        self.eval_budget = eval_budget
        self.bandwidth_floor = bandwidth_floor

    # -- fitting -----------------------------------------------------------

    def fit(self, table: SimTable, y=None):
        if self.slice not in ("marginalize", "fix-at-mode"):
            raise ValueError(f"unknown slice mode: {self.slice!r}")
        stat_names = list(self.statistics) if self.statistics else list(table.stat_names)
        missing = [s for s in stat_names if s not in table.stat_names]
        if missing:
            raise ValueError(f"statistics not in table: {missing}")
        cols = [table.stat_names.index(s) for s in stat_names]
        stats = table.stats[:, cols]
        keep = ~np.isnan(stats).any(axis=1)
        self.n_dropped_ = int((~keep).sum())
        stats = stats[keep]
        params = table.params[keep]
        dens = table.prior_density[keep]
        n = len(stats)
        if n < 2:
            raise ValueError(f"need at least 2 usable runs, got {n}")

        self.param_names_ = list(table.param_names)
        self.stat_names_ = stat_names
        self.param_bounds_ = [tuple(map(float, b)) for b in table.param_bounds]

        scaled_p = np.empty_like(params)
        for j, (lo, hi) in enumerate(self.param_bounds_):
            scaled_p[:, j] = (params[:, j] - lo) / (hi - lo)

        self.stat_bounds_ = []
        scaled_s = np.empty_like(stats)
        for j in range(stats.shape[1]):
            smin, smax = float(stats[:, j].min()), float(stats[:, j].max())
            rng_ = smax - smin
            if rng_ == 0:
                raise ValueError(
                    f"statistic {stat_names[j]!r} is constant across runs")
            qmin = smin - rng_ / (n + 1)
            qmax = smax + rng_ / (n + 1)
            self.stat_bounds_.append((qmin, qmax))
            scaled_s[:, j] = (stats[:, j] - qmin) / (qmax - qmin)

        self.points_ = np.hstack([scaled_p, scaled_s])
        self.weights_ = 1.0 / dens
        if not np.all(np.isfinite(self.weights_)):
            raise ValueError("non-finite prior-inverse weights")

        d = self.points_.shape[1]
        factor = scott_factor(n, d)
        if n >= 2:
            sd = self.points_.std(axis=0, ddof=1)
        else:
            sd = np.zeros(d)
        self.sigmas_ = np.maximum(factor * sd, self.bandwidth_floor)
        return self

    # -- evaluation --------------------------------------------------------

    @property
    def n_dims_(self) -> int:
        return self.points_.shape[1]

    def density_scaled(self, queries: np.ndarray) -> np.ndarray:
        """Evaluate the weighted kernel density at scaled query points."""
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        d = self.n_dims_
        if q.shape[1] != d:
            raise ValueError(f"queries must have {d} columns")
        const = (2.0 * np.pi) ** (-d / 2.0) / np.prod(self.sigmas_)
        out = np.empty(len(q))
        chunk = max(1, 2_000_000 // max(len(self.points_), 1))
        for start in range(0, len(q), chunk):
            block = q[start:start + chunk]
            z = (block[:, None, :] - self.points_[None, :, :]) / self.sigmas_
            e = np.exp(-0.5 * np.einsum("mnd,mnd->mn", z, z))
            out[start:start + chunk] = e @ self.weights_
        return const * out

    def _scale_observed(self, observed) -> np.ndarray:
        if isinstance(observed, StatVector):
            observed = observed.as_dict()
        missing = [s for s in self.stat_names_ if s not in observed]
        if missing:
            raise ValueError(f"observed statistics missing: {missing}")
        y = np.empty(len(self.stat_names_))
        np_ = len(self.param_names_)
        for j, name in enumerate(self.stat_names_):
            qmin, qmax = self.stat_bounds_[j]
            v = (float(observed[name]) - qmin) / (qmax - qmin)
            sig = self.sigmas_[np_ + j]
            if v < -3.0 * sig or v > 1.0 + 3.0 * sig:
                raise ValueError(
                    f"observed {name} = {observed[name]} lies more than 3 "
                    "bandwidths outside the simulated statistic range")
            if v < 0.0 or v > 1.0:
                warnings.warn(
                    f"observed {name} outside the simulated statistic range",
                    stacklevel=3)
            y[j] = v
        return y

    def _run_coefficients(self, observed, plot_idx: list[int],
                          resolution: int) -> np.ndarray:
        """Per-run weight x statistic kernel x marginalized-dimension
        factor; shared by every grid evaluation."""
        y = self._scale_observed(observed)
        np_ = len(self.param_names_)
        stat_pts = self.points_[:, np_:]
        stat_sig = self.sigmas_[np_:]
        z = (y - stat_pts) / stat_sig
        coeff = self.weights_ * np.exp(-0.5 * np.einsum("nd,nd->n", z, z))

        free = [j for j in range(np_) if j not in plot_idx]
        if free:
            if self.slice == "marginalize":
                m = lattice_size(resolution ** len(plot_idx), len(free),
                                 self.eval_budget)
                lattice = np.linspace(0.0, 1.0, m)
                for j in free:
                    zj = (lattice[None, :] - self.points_[:, j, None]) / self.sigmas_[j]
                    coeff = coeff * np.exp(-0.5 * zj * zj).mean(axis=1)
            else:
                for j in free:
                    mode = self._marginal_mode(observed, j)
                    zj = (mode - self.points_[:, j]) / self.sigmas_[j]
                    coeff = coeff * np.exp(-0.5 * zj * zj)
        return coeff

    def _marginal_mode(self, observed, dim: int) -> float:
        """Scaled-coordinate mode of the 1-D marginal for one parameter."""
        saved = self.slice
        self.slice = "marginalize"
        try:
            grid = self.conditional_grid(observed, [self.param_names_[dim]], 256)
        finally:
            self.slice = saved
        lo, hi = self.param_bounds_[dim]
        value = grid.axes[0][1][int(np.argmax(grid.density))]
        return (value - lo) / (hi - lo)

    def conditional_grid(self, observed, plot_dims, resolution: int = 64) -> DensityGrid:
        """Normalized conditional density over 1 or 2 parameter axes."""
        if isinstance(plot_dims, str):
            plot_dims = [plot_dims]
        if not 1 <= len(plot_dims) <= 2:
            raise ValueError("plot_dims must name 1 or 2 parameters")
        bad = [p for p in plot_dims if p not in self.param_names_]
        if bad:
            raise ValueError(f"unknown parameters: {bad}")
        plot_idx = [self.param_names_.index(p) for p in plot_dims]
        coeff = self._run_coefficients(observed, plot_idx, resolution)

        scaled_axis = np.linspace(0.0, 1.0, resolution)
        kernels = []
        axes = []
        for j, name in zip(plot_idx, plot_dims):
            zj = (scaled_axis[None, :] - self.points_[:, j, None]) / self.sigmas_[j]
            kernels.append(np.exp(-0.5 * zj * zj))
            lo, hi = self.param_bounds_[j]
            axes.append((name, lo + scaled_axis * (hi - lo)))

        d = self.n_dims_
        const = (2.0 * np.pi) ** (-d / 2.0) / np.prod(self.sigmas_)
        if len(plot_idx) == 1:
            density = const * (coeff @ kernels[0])
        else:
            density = const * np.einsum("n,na,nb->ab", coeff, kernels[0], kernels[1])

        norm = density
        for _, vals in reversed(axes):
            norm = np.trapezoid(norm, vals, axis=-1)
        norm = float(norm)
        if norm <= 0 or not np.isfinite(norm):
            raise ValueError("conditional density has no mass on the grid")
        return DensityGrid(axes=axes, density=density / norm, normalization=norm)

    def posterior_summaries(self, observed, level: float = 0.95,
                            resolution: int = 512) -> list[dict]:
        """Per-parameter mean, mode and highest-density interval."""
        out = []
        for name in self.param_names_:
            grid = self.conditional_grid(observed, [name], resolution)
            x = grid.axes[0][1]
            h = grid.density
            w = _trapezoid_weights(x)
            mass = w * h
            mean = float((x * mass).sum() / mass.sum())
            mode = float(x[int(np.argmax(h))])
            order = np.argsort(h)[::-1]
            cum = np.cumsum(mass[order]) / mass.sum()
            take = order[: int(np.searchsorted(cum, level) + 1)]
            out.append({
                "parameter": name,
                "mean": mean,
                "mode": mode,
                "hdr_lo": float(x[take].min()),
                "hdr_hi": float(x[take].max()),
                "level": level,
            })
        return out


def write_posterior_csv(summaries: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["parameter", "mean", "mode", "hdr_lo", "hdr_hi", "level"])
        for s in summaries:
            w.writerow([s["parameter"], repr(s["mean"]), repr(s["mode"]),
                        repr(s["hdr_lo"]), repr(s["hdr_hi"]), repr(s["level"])])
