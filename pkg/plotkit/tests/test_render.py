import hashlib

import numpy as np
import pytest

from plotkit.cli import main
from plotkit.render import PlotJob, SchemaError, moving_average, render


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_grid_csv(path, name_a, name_b, axis_a, axis_b, density):
    lines = ["param_a,param_b,value_a,value_b,density"]
    for i, a in enumerate(axis_a):
        for j, b in enumerate(axis_b):
            lines.append(f"{name_a},{name_b},{float(a)!r},{float(b)!r},"
                         f"{float(density[i, j])!r}")
    path.write_text("\n".join(lines) + "\n")


def gaussian_grid(center_a=0.3, center_b=0.7):
    axis_a = np.linspace(0.0, 1.0, 21)
    axis_b = np.linspace(0.0, 1.0, 21)
    aa, bb = np.meshgrid(axis_a, axis_b, indexing="ij")
    dens = np.exp(-(((aa - center_a) / 0.08) ** 2
                    + ((bb - center_b) / 0.08) ** 2))
    return axis_a, axis_b, dens


def write_stats_csv(path, x, y, xname="avg_degree", yname="slope_used"):
    lines = [f"run_id,prior_density,{xname},{yname}"]
    for i, (a, b) in enumerate(zip(x, y)):
        b_txt = "" if not np.isfinite(b) else repr(float(b))
        lines.append(f"{i},1.0,{float(a)!r},{b_txt}")
    path.write_text("\n".join(lines) + "\n")


# -- moving average --------------------------------------------------------

def test_moving_average_hand_case():
    gx, gy = moving_average(np.array([0.0, 1.0, 2.0, 3.0]),
                            np.array([0.0, 1.0, 2.0, 3.0]), 2.1)
    assert list(gx) == [0.0, 1.0, 2.0, 3.0]
    assert gy == pytest.approx([0.5, 1.0, 2.0, 2.5])


def test_moving_average_drops_nan_and_empty_windows():
    gx, gy = moving_average(np.array([0.0, 0.1, 5.0]),
                            np.array([1.0, np.nan, 3.0]), 0.5,
                            grid=np.array([0.0, 2.5, 5.0]))
    assert list(gx) == [0.0, 5.0]
    assert gy == pytest.approx([1.0, 3.0])


# -- density2d -------------------------------------------------------------

def test_density2d_centroid_at_bump(tmp_path):
    axis_a, axis_b, dens = gaussian_grid()
    src = tmp_path / "grid2d.csv"
    write_grid_csv(src, "phi", "alpha", axis_a, axis_b, dens)
    out = tmp_path / "plot.png"
    job = PlotJob("density2d", str(src), str(out),
                  truth={"phi": 0.3, "alpha": 0.7})
    before = sha(src)
    render(job)
    assert sha(src) == before          # input untouched
    assert out.stat().st_size > 0
    assert out.read_bytes()[:4] == b"\x89PNG"


def test_density2d_rejects_partial_grid(tmp_path):
    src = tmp_path / "grid2d.csv"
    src.write_text("param_a,param_b,value_a,value_b,density\n"
                   "a,b,0.0,0.0,1.0\n"
                   "a,b,0.0,1.0,1.0\n"
                   "a,b,1.0,0.0,1.0\n")
    with pytest.raises(SchemaError, match="grid"):
        render(PlotJob("density2d", str(src), str(tmp_path / "o.png")))


def test_density2d_rejects_missing_columns(tmp_path):
    src = tmp_path / "grid.csv"
    src.write_text("parameter,value,density\np,0.0,1.0\n")
    with pytest.raises(SchemaError, match="missing column"):
        render(PlotJob("density2d", str(src), str(tmp_path / "o.png")))


# -- scatter-smooth --------------------------------------------------------

def test_scatter_smooth_renders_with_annotation(tmp_path):
    # V-shaped trend with minimum near x = 2.3, as in the degree
    # diagnostic: the smoothed minimum stays inside [1.8, 3.0].
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 7, size=600)
    y = -0.4 * np.exp(-((x - 2.3) / 0.8) ** 2) + rng.normal(0, 0.05, 600)
    y[::50] = np.nan
    src = tmp_path / "stats.csv"
    write_stats_csv(src, x, y)
    out = tmp_path / "fig.png"
    before = sha(src)
    render(PlotJob("scatter-smooth", str(src), str(out)))
    assert sha(src) == before
    assert out.stat().st_size > 0
    gx, gy = moving_average(x, y, 0.25)
    assert 1.8 <= gx[int(np.nanargmin(gy))] <= 3.0


def test_scatter_smooth_rejects_all_missing(tmp_path):
    src = tmp_path / "stats.csv"
    write_stats_csv(src, [1.0, 2.0], [np.nan, np.nan])
    with pytest.raises(SchemaError, match="no finite"):
        render(PlotJob("scatter-smooth", str(src), str(tmp_path / "o.png")))


# -- posterior-bars --------------------------------------------------------

def test_posterior_bars_renders(tmp_path):
    src = tmp_path / "posterior.csv"
    src.write_text(
        "parameter,mean,mode,hdr_lo,hdr_hi,level\n"
        "phi,0.1,0.09,0.02,0.2,0.95\n"
        "gamma,6.5,6.8,3.0,9.5,0.95\n")
    out = tmp_path / "bars.png"
    render(PlotJob("posterior-bars", str(src), str(out),
                   truth={"phi": 0.093}))
    assert out.stat().st_size > 0


# -- CLI -------------------------------------------------------------------

def test_cli_exit_codes(tmp_path):
    axis_a, axis_b, dens = gaussian_grid()
    src = tmp_path / "grid2d.csv"
    write_grid_csv(src, "phi", "alpha", axis_a, axis_b, dens)
    out = tmp_path / "fig.png"
    rc = main(["density2d", "--in", str(src), "--out", str(out),
               "--truth", "phi=0.3", "alpha=0.7"])
    assert rc == 0 and out.stat().st_size > 0

    empty = tmp_path / "empty.csv"
    empty.write_text("param_a,param_b,value_a,value_b,density\n")
    assert main(["density2d", "--in", str(empty),
                 "--out", str(tmp_path / "x.png")]) == 2

    assert main(["density2d", "--in", str(src),
                 "--out", str(tmp_path / "x.png"),
                 "--truth", "oops"]) == 2


def test_cli_deterministic_output_dimensions(tmp_path):
    axis_a, axis_b, dens = gaussian_grid()
    src = tmp_path / "grid2d.csv"
    write_grid_csv(src, "phi", "alpha", axis_a, axis_b, dens)
    from PIL import Image

    sizes = set()
    for name in ("a.png", "b.png"):
        out = tmp_path / name
        assert main(["density2d", "--in", str(src), "--out", str(out)]) == 0
        with Image.open(out) as im:
            sizes.add(im.size)
    assert len(sizes) == 1
