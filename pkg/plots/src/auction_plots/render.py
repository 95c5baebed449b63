"""Figure rendering: one box group per mechanism.

Boxes span the quartiles, whiskers the 5th to 95th percentile; the median
is a line and the mean a triangle marker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  backend must be fixed first

from .stats import DEFAULT_ORDER, BoxStats, group_stats, read_rows

_LABELS = {
    "social_welfare": "social welfare",
    "revenue": "revenue",
    "ratio": "welfare / optimal welfare",
}


@dataclass(frozen=True)
class PlotSpec:
    input: str
    metric: str
    output: str
    order: Sequence[str] = field(default=DEFAULT_ORDER)


def render_boxplot(spec: PlotSpec) -> list[BoxStats]:
    """Writes the figure and returns the statistics it was drawn from."""
    rows = read_rows(spec.input)
    stats = group_stats(rows, spec.metric, spec.order)
    boxes = [
        {
            "label": s.mechanism,
            "mean": float(s.mean),
            "med": float(s.median),
            "q1": float(s.q1),
            "q3": float(s.q3),
            "whislo": float(s.p5),
            "whishi": float(s.p95),
        }
        for s in stats
    ]
    fig, ax = plt.subplots(figsize=(1.6 * len(boxes) + 1.5, 4.0))
    try:
        ax.bxp(
            boxes,
            showmeans=True,
            showfliers=False,
            medianprops={"color": "tab:orange"},
            meanprops={
                "marker": "^",
                "markerfacecolor": "tab:green",
                "markeredgecolor": "tab:green",
            },
        )
        ax.set_ylabel(_LABELS[spec.metric])
        ax.set_xlabel("mechanism")
        fig.tight_layout()
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return stats
