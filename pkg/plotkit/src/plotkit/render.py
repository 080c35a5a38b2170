"""Render figures from pipeline CSV artifacts.

Three plot kinds are supported, each consuming one published CSV schema:

- ``density2d``: a two-parameter conditional density grid
  (``param_a,param_b,value_a,value_b,density``) drawn as filled contours,
  with the density centroid marked as a triangle and an optional truth
  point as a square.
- ``scatter-smooth``: a per-run table (``run_id,prior_density,<columns>``)
  drawn as a scatter of one column against another with a centered
  moving-average curve; the curve minimum is annotated.
- ``posterior-bars``: per-parameter posterior summaries
  (``parameter,mean,mode,hdr_lo,hdr_hi,level``) drawn as interval bars.

Rendering is read-only: input files are never modified.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("density2d", "scatter-smooth", "posterior-bars")


class SchemaError(Exception):
    """Raised when an input file does not match the expected schema."""


@dataclass
class PlotJob:
    kind: str
    input_path: str
    output_path: str
    truth: dict = field(default_factory=dict)
    x_column: str = "avg_degree"
    y_column: str = "slope_used"
    window: float = 0.25

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown plot kind: {self.kind!r}")


def _read_rows(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            rows = [r for r in reader if r]
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, rows


def _columns(header: list[str], rows: list[list[str]],
             wanted: list[str], path: str) -> dict:
    missing = [c for c in wanted if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}; "
                          f"found {header}")
    idx = {c: header.index(c) for c in wanted}
    return {c: [row[i] for row in rows] for c, i in idx.items()}


def _floats(values: list[str], column: str, path: str) -> np.ndarray:
    try:
        return np.array([float(v) if v != "" else np.nan for v in values])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric value in {column!r}: {exc}")


def moving_average(x: np.ndarray, y: np.ndarray, window: float,
                   grid: np.ndarray | None = None):
    """Centered moving average of y over x; windows with no points and
    missing y values are dropped."""
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if grid is None:
        grid = np.unique(x)
    gx, gy = [], []
    half = window / 2.0
    for g in np.asarray(grid, float):
        mask = np.abs(x - g) <= half
        if mask.any():
            gx.append(g)
            gy.append(float(y[mask].mean()))
    return np.array(gx), np.array(gy)


def render_density2d(job: PlotJob) -> None:
    header, rows = _read_rows(job.input_path)
    wanted = ["param_a", "param_b", "value_a", "value_b", "density"]
    cols = _columns(header, rows, wanted, job.input_path)
    name_a = cols["param_a"][0]
    name_b = cols["param_b"][0]
    va = _floats(cols["value_a"], "value_a", job.input_path)
    vb = _floats(cols["value_b"], "value_b", job.input_path)
    dens = _floats(cols["density"], "density", job.input_path)

    axis_a = np.unique(va)
    axis_b = np.unique(vb)
    if len(axis_a) * len(axis_b) != len(rows):
        raise SchemaError(f"{job.input_path}: rows do not form a full "
                          f"{len(axis_a)}x{len(axis_b)} grid")
    grid = np.full((len(axis_a), len(axis_b)), np.nan)
    ia = np.searchsorted(axis_a, va)
    ib = np.searchsorted(axis_b, vb)
    grid[ia, ib] = dens
    if not np.isfinite(grid).all():
        raise SchemaError(f"{job.input_path}: grid has missing cells")

    total = grid.sum()
    if total <= 0:
        raise SchemaError(f"{job.input_path}: density sums to zero")
    centroid_a = float((grid.sum(axis=1) * axis_a).sum() / total)
    centroid_b = float((grid.sum(axis=0) * axis_b).sum() / total)

    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    bb, aa = np.meshgrid(axis_b, axis_a)
    cf = ax.contourf(aa, bb, grid, levels=14, cmap="viridis")
    ax.contour(aa, bb, grid, levels=14, colors="black",
               linewidths=0.4, alpha=0.5)
    fig.colorbar(cf, ax=ax, label="density")
    ax.plot(centroid_a, centroid_b, marker="^", color="white",
            markeredgecolor="black", markersize=11, linestyle="none",
            label="centroid")
    truth_a = job.truth.get(name_a)
    truth_b = job.truth.get(name_b)
    if truth_a is not None and truth_b is not None:
        ax.plot(truth_a, truth_b, marker="s", color="red",
                markeredgecolor="black", markersize=9, linestyle="none",
                label="truth")
    ax.set_xlabel(name_a)
    ax.set_ylabel(name_b)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=120)
    plt.close(fig)


def render_scatter_smooth(job: PlotJob) -> None:
    header, rows = _read_rows(job.input_path)
    cols = _columns(header, rows, [job.x_column, job.y_column],
                    job.input_path)
    x = _floats(cols[job.x_column], job.x_column, job.input_path)
    y = _floats(cols[job.y_column], job.y_column, job.input_path)
    keep = np.isfinite(x) & np.isfinite(y)
    if not keep.any():
        raise SchemaError(f"{job.input_path}: no finite "
                          f"({job.x_column}, {job.y_column}) pairs")

    gx, gy = moving_average(x, y, job.window)

    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.plot(x[keep], y[keep], ".", color="gray", alpha=0.35, markersize=4)
    order = np.argsort(gx)
    ax.plot(gx[order], gy[order], color="crimson", linewidth=2.0,
            label=f"moving average (window {job.window})")
    i_min = int(np.nanargmin(gy))
    ax.annotate(f"min {gy[i_min]:.3f} at {gx[i_min]:.2f}",
                xy=(gx[i_min], gy[i_min]),
                xytext=(gx[i_min], gy[i_min] - 0.1 * (np.ptp(y[keep]) or 1.0)),
                arrowprops=dict(arrowstyle="->", color="black"),
                ha="center")
    ax.set_xlabel(job.x_column)
    ax.set_ylabel(job.y_column)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=120)
    plt.close(fig)


def render_posterior_bars(job: PlotJob) -> None:
    header, rows = _read_rows(job.input_path)
    wanted = ["parameter", "mean", "mode", "hdr_lo", "hdr_hi", "level"]
    cols = _columns(header, rows, wanted, job.input_path)
    names = cols["parameter"]
    mean = _floats(cols["mean"], "mean", job.input_path)
    mode = _floats(cols["mode"], "mode", job.input_path)
    lo = _floats(cols["hdr_lo"], "hdr_lo", job.input_path)
    hi = _floats(cols["hdr_hi"], "hdr_hi", job.input_path)
    level = _floats(cols["level"], "level", job.input_path)

    fig, ax = plt.subplots(figsize=(6.0, 1.2 + 0.8 * len(names)))
    ypos = np.arange(len(names))[::-1]
    for yp, m, md, a, b in zip(ypos, mean, mode, lo, hi):
        ax.plot([a, b], [yp, yp], color="steelblue", linewidth=4,
                solid_capstyle="butt", alpha=0.6)
        ax.plot(m, yp, "o", color="black")
        ax.plot(md, yp, "d", color="crimson")
    for i, name in enumerate(names):
        t = job.truth.get(name)
        if t is not None:
            ax.plot(t, ypos[i], "s", color="green", markersize=8,
                    markeredgecolor="black")
    ax.set_yticks(ypos)
    ax.set_yticklabels(names)
    ax.set_xlabel("value")
    ax.set_title(f"posterior mean (o), mode (d), {level[0]:.0%} interval")
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=120)
    plt.close(fig)


_RENDERERS = {
    "density2d": render_density2d,
    "scatter-smooth": render_scatter_smooth,
    "posterior-bars": render_posterior_bars,
}


def render(job: PlotJob) -> None:
    _RENDERERS[job.kind](job)
