"""Figure renderer for abcnet pipeline artifacts."""

from plotkit.render import (
    PlotJob,
    SchemaError,
    render,
    render_density2d,
    render_posterior_bars,
    render_scatter_smooth,
)

__all__ = [
    "PlotJob",
    "SchemaError",
    "render",
    "render_density2d",
    "render_posterior_bars",
    "render_scatter_smooth",
]
