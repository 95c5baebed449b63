"""Box plots over diffusion-auction experiment CSVs.

This package deliberately talks to the auction library through CSV files
only; the statistics are recomputed here with the same interpolation rule
the experiment harness uses, so a rendered plot always agrees with the
summary file shipped next to it.
"""

from .stats import (
    BoxStats,
    EmptyGroupError,
    MissingColumnError,
    PlotError,
    DEFAULT_ORDER,
    METRICS,
    group_stats,
    metric_values,
    percentile,
    read_rows,
)
from .render import PlotSpec, render_boxplot

__all__ = [
    "BoxStats",
    "DEFAULT_ORDER",
    "EmptyGroupError",
    "METRICS",
    "MissingColumnError",
    "PlotError",
    "PlotSpec",
    "group_stats",
    "metric_values",
    "percentile",
    "read_rows",
    "render_boxplot",
]
__version__ = "0.1.0"
