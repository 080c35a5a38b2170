import math

import numpy as np
import pytest

from abcnet.kde import (
    ConditionalKernelDensity,
    DensityGrid,
    lattice_size,
    scott_factor,
)
from abcnet.table import SimTable


def make_table(params, stats, bounds, prior=None, pnames=None, snames=None):
    params = np.asarray(params, dtype=float)
    stats = np.asarray(stats, dtype=float)
    if params.ndim == 1:
        params = params[:, None]
    if stats.ndim == 1:
        stats = stats[:, None]
    n = len(params)
    pnames = pnames or [f"p{i}" for i in range(params.shape[1])]
    snames = snames or [f"s{i}" for i in range(stats.shape[1])]
    return SimTable(
        param_names=pnames, stat_names=snames, params=params, stats=stats,
        prior_density=np.ones(n) if prior is None else np.asarray(prior, float),
        param_bounds=list(bounds), run_ids=list(range(n)),
    )


def test_scott_factor_arithmetic():
    assert scott_factor(2500, 12) == pytest.approx(2500 ** (-1 / 16))
    assert scott_factor(100, 1) == pytest.approx(100 ** (-0.2))


def test_lattice_size_bounds():
    assert lattice_size(64, 0) == 0
    assert lattice_size(10 ** 9, 3) == 2          # budget exhausted
    assert lattice_size(1, 1, budget=1000) == 64  # capped
    assert lattice_size(100, 2, budget=250_000) == 50


def test_scaling_of_parameters_and_statistics():
    # Three runs with statistic values {0, 1, 1}: the buffered statistic
    # bounds are -0.25 and 1.25, so 0 -> 1/6 and 1 -> 5/6.
    table = make_table([0.0, 7.0, 3.5], [0.0, 1.0, 1.0], [(0.0, 7.0)])
    kde = ConditionalKernelDensity().fit(table)
    assert kde.stat_bounds_[0] == pytest.approx((-0.25, 1.25))
    assert kde.points_[:, 0] == pytest.approx([0.0, 1.0, 0.5])
    assert kde.points_[:, 1] == pytest.approx([1 / 6, 5 / 6, 5 / 6])


def test_bandwidth_floor_on_degenerate_dimension():
    table = make_table(
        np.column_stack([[2.0, 2.0, 2.0, 2.0], [1.0, 2.0, 3.0, 4.0]]),
        [0.1, 0.2, 0.3, 0.4],
        [(0.0, 4.0), (0.0, 4.0)],
    )
    kde = ConditionalKernelDensity().fit(table)
    assert kde.sigmas_[0] == pytest.approx(1e-4)
    assert kde.sigmas_[1] > 1e-3


def test_bandwidth_matches_scott_rule(rng):
    params = rng.random(50) * 7
    stats = rng.random(50)
    table = make_table(params, stats, [(0.0, 7.0)])
    kde = ConditionalKernelDensity().fit(table)
    factor = 50 ** (-1 / 6)
    assert kde.sigmas_[0] == pytest.approx(factor * np.std(params / 7, ddof=1))
    qmin, qmax = kde.stat_bounds_[0]
    scaled = (stats - qmin) / (qmax - qmin)
    assert kde.sigmas_[1] == pytest.approx(factor * np.std(scaled, ddof=1))


def python_density_oracle(points, sigmas, weights, query):
    """Direct-sum weighted product-Gaussian density in scaled space."""
    d = len(sigmas)
    const = (2 * math.pi) ** (-d / 2) / math.prod(float(s) for s in sigmas)
    total = 0.0
    for point, w in zip(points, weights):
        e = 0.0
        for q, p, s in zip(query, point, sigmas):
            e += ((q - p) / s) ** 2
        total += float(w) * math.exp(-0.5 * e)
    return const * total


def test_density_matches_direct_sum_oracle(rng):
    params = rng.random((30, 2))
    stats = rng.random((30, 2))
    prior = rng.random(30) + 0.5
    table = make_table(params, stats, [(0.0, 1.0), (0.0, 1.0)], prior=prior)
    kde = ConditionalKernelDensity().fit(table)
    queries = rng.random((20, 4))
    got = kde.density_scaled(queries)
    for q, g in zip(queries, got):
        expect = python_density_oracle(kde.points_, kde.sigmas_,
                                       kde.weights_, q)
        assert g == pytest.approx(expect, rel=1e-12)


def test_conditional_grid_matches_lattice_oracle(rng):
    # Marginalizing free parameter dimensions over the interior lattice
    # must agree with brute-force averaging of the full-dimensional
    # density over the same lattice.
    n = 6
    params = rng.random((n, 3))
    stats = rng.random((n, 2)) * 0.5 + 0.25
    prior = rng.random(n) + 0.2
    table = make_table(params, stats,
                       [(0.0, 1.0)] * 3, prior=prior,
                       pnames=["a", "b", "c"])
    kde = ConditionalKernelDensity().fit(table)
    observed = {"s0": 0.4, "s1": 0.5}
    res = 16
    grid = kde.conditional_grid(observed, ["b"], resolution=res)

    y = kde._scale_observed(observed)
    m = lattice_size(res, 2, kde.eval_budget)
    lattice = np.linspace(0.0, 1.0, m)
    axis = np.linspace(0.0, 1.0, res)
    raw = np.empty(res)
    la, lc = np.meshgrid(lattice, lattice, indexing="ij")
    for i, b in enumerate(axis):
        queries = np.column_stack([
            la.ravel(), np.full(m * m, b), lc.ravel(),
            np.full(m * m, y[0]), np.full(m * m, y[1]),
        ])
        raw[i] = kde.density_scaled(queries).mean()
    expect = raw / np.trapezoid(raw, grid.axes[0][1])
    assert grid.density == pytest.approx(expect, rel=1e-9)


def test_conditional_grid_2d_matches_oracle(rng):
    n = 5
    params = rng.random((n, 2))
    stats = rng.random(n)
    table = make_table(params, stats, [(0.0, 1.0)] * 2, pnames=["a", "b"])
    kde = ConditionalKernelDensity().fit(table)
    observed = {"s0": float(stats.mean())}
    res = 12
    grid = kde.conditional_grid(observed, ["a", "b"], resolution=res)
    y = kde._scale_observed(observed)
    axis = np.linspace(0.0, 1.0, res)
    aa, bb = np.meshgrid(axis, axis, indexing="ij")
    queries = np.column_stack([aa.ravel(), bb.ravel(),
                               np.full(res * res, y[0])])
    raw = kde.density_scaled(queries).reshape(res, res)
    norm = np.trapezoid(np.trapezoid(raw, axis, axis=-1), axis)
    assert grid.density == pytest.approx(raw / norm, rel=1e-9)
    assert grid.axes[0][0] == "a" and grid.axes[1][0] == "b"


def test_constant_prior_scale_cancels(rng):
    params = rng.random(20)
    stats = rng.random(20)
    t1 = make_table(params, stats, [(0.0, 1.0)])
    t2 = make_table(params, stats, [(0.0, 1.0)], prior=np.full(20, 3.7))
    obs = {"s0": 0.5}
    g1 = ConditionalKernelDensity().fit(t1).conditional_grid(obs, ["p0"], 32)
    g2 = ConditionalKernelDensity().fit(t2).conditional_grid(obs, ["p0"], 32)
    assert g1.density == pytest.approx(g2.density, rel=1e-12)


def test_fit_drops_runs_with_missing_statistics(rng):
    stats = rng.random((10, 2))
    stats[3, 0] = np.nan
    stats[7, 1] = np.nan
    table = make_table(rng.random(10), stats, [(0.0, 1.0)])
    kde = ConditionalKernelDensity().fit(table)
    assert kde.n_dropped_ == 2
    assert len(kde.points_) == 8
    # conditioning on only the complete statistic keeps all runs
    kde2 = ConditionalKernelDensity(statistics=["s1"]).fit(table)
    assert kde2.n_dropped_ == 1
    assert kde2.stat_names_ == ["s1"]


def test_fit_rejects_constant_statistic():
    table = make_table([0.1, 0.5, 0.9], [1.0, 1.0, 1.0], [(0.0, 1.0)])
    with pytest.raises(ValueError, match="constant"):
        ConditionalKernelDensity().fit(table)


def test_observed_outside_range_warns_then_errors(rng):
    params = rng.random(30)
    stats = rng.random(30) * 0.2 + 0.4
    table = make_table(params, stats, [(0.0, 1.0)])
    kde = ConditionalKernelDensity().fit(table)
    qmin, qmax = kde.stat_bounds_[0]
    span = qmax - qmin
    sig = kde.sigmas_[1]
    with pytest.warns(UserWarning):
        kde.conditional_grid({"s0": qmin - 0.5 * sig * span}, ["p0"], 16)
    with pytest.raises(ValueError, match="3 "):
        kde.conditional_grid({"s0": qmin - 4.0 * sig * span}, ["p0"], 16)
    with pytest.raises(ValueError, match="missing"):
        kde.conditional_grid({"other": 0.5}, ["p0"], 16)


def test_symmetric_table_gives_centered_posterior():
    params = np.array([0.3, 0.7, 0.4, 0.6])
    stats = np.array([0.45, 0.55, 0.48, 0.52])
    table = make_table(params, stats, [(0.0, 1.0)])
    kde = ConditionalKernelDensity().fit(table)
    (summary,) = kde.posterior_summaries({"s0": 0.5}, resolution=513)
    assert summary["mean"] == pytest.approx(0.5, abs=1e-6)
    assert summary["mode"] == pytest.approx(0.5, abs=2e-3)
    assert summary["hdr_lo"] + summary["hdr_hi"] == pytest.approx(1.0, abs=2e-3)
    assert summary["level"] == 0.95


def test_hdr_mass_close_to_level(rng):
    params = rng.normal(0.5, 0.15, size=200).clip(0.01, 0.99)
    stats = params + rng.normal(0, 0.05, size=200)
    table = make_table(params, stats, [(0.0, 1.0)])
    kde = ConditionalKernelDensity().fit(table)
    (summary,) = kde.posterior_summaries({"s0": 0.5}, level=0.9,
                                         resolution=1024)
    grid = kde.conditional_grid({"s0": 0.5}, ["p0"], 4096)
    x, h = grid.axes[0][1], grid.density
    inside = (x >= summary["hdr_lo"]) & (x <= summary["hdr_hi"])
    mass = np.trapezoid(np.where(inside, h, 0.0), x)
    assert mass == pytest.approx(0.9, abs=0.02)
    assert summary["hdr_lo"] < summary["mode"] < summary["hdr_hi"]


def test_fix_at_mode_slice(rng):
    params = rng.random((40, 2))
    stats = params[:, 0] + rng.normal(0, 0.1, size=40)
    table = make_table(params, stats, [(0.0, 1.0)] * 2, pnames=["a", "b"])
    obs = {"s0": 0.5}
    fixed = ConditionalKernelDensity(slice="fix-at-mode").fit(table)
    grid = fixed.conditional_grid(obs, ["a"], 64)
    assert grid.density.shape == (64,)
    assert np.trapezoid(grid.density, grid.axes[0][1]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ConditionalKernelDensity(slice="nope").fit(table)


def test_grid_csv_formats(tmp_path):
    g1 = DensityGrid(axes=[("a", np.array([0.0, 1.0]))],
                     density=np.array([0.25, 0.75]), normalization=1.0)
    p1 = tmp_path / "g1.csv"
    g1.write_csv(p1)
    lines = p1.read_text().splitlines()
    assert lines[0] == "parameter,value,density"
    assert lines[1] == "a,0.0,0.25"

    g2 = DensityGrid(
        axes=[("a", np.array([0.0, 1.0])), ("b", np.array([2.0, 3.0]))],
        density=np.arange(4.0).reshape(2, 2), normalization=1.0)
    p2 = tmp_path / "g2.csv"
    g2.write_csv(p2)
    lines = p2.read_text().splitlines()
    assert lines[0] == "param_a,param_b,value_a,value_b,density"
    assert len(lines) == 5
    assert lines[1] == "a,b,0.0,2.0,0.0"


def test_needs_two_usable_runs():
    table = make_table([0.5], [0.5], [(0.0, 1.0)])
    with pytest.raises(ValueError, match="at least 2"):
        ConditionalKernelDensity().fit(table)
