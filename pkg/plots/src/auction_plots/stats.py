"""CSV reading and summary statistics.

Percentiles use linear interpolation between closest ranks on the sorted
sample, matching the experiment harness, and all arithmetic is exact so a
recomputed statistic reproduces the summary CSV digit for digit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_ORDER = ("nsp", "stm", "scm", "idm", "vcg")
METRICS = ("social_welfare", "revenue", "ratio")


class PlotError(ValueError):
    pass


class MissingColumnError(PlotError):
    def __init__(self, column: str) -> None:
        super().__init__(f"input CSV has no column {column!r}")
        self.column = column


class EmptyGroupError(PlotError):
    def __init__(self, mechanism: str, metric: str) -> None:
        super().__init__(f"no {metric!r} rows for mechanism {mechanism!r}")
        self.mechanism = mechanism
        self.metric = metric


def read_rows(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or ()
        for column in ("mechanism", "social_welfare", "revenue"):
            if column not in fields:
                raise MissingColumnError(column)
        return list(reader)


def metric_values(rows: Iterable[dict], metric: str) -> dict[str, list[Fraction]]:
    """Per-mechanism value lists for one metric, in row order.

    Reserved or empty-market outcomes carry welfare 0 and no meaningful
    efficiency ratio; such rows are dropped from the ratio metric only.
    """
    if metric not in METRICS:
        raise PlotError(f"unknown metric {metric!r}; expected one of {METRICS}")
    out: dict[str, list[Fraction]] = {}
    for row in rows:
        name = row["mechanism"]
        if metric == "ratio":
            if "optimal_welfare" not in row or row["optimal_welfare"] is None:
                raise MissingColumnError("optimal_welfare")
            welfare = Fraction(row["social_welfare"])
            optimal = Fraction(row["optimal_welfare"])
            if welfare == 0 or optimal == 0:
                out.setdefault(name, [])
                continue
            value = welfare / optimal
        else:
            value = Fraction(row[metric])
        out.setdefault(name, []).append(value)
    return out


def percentile(sample: Sequence[Fraction], fraction: Fraction) -> Fraction:
    if not sample:
        raise PlotError("empty sample")
    data = sorted(sample)
    if len(data) == 1:
        return Fraction(data[0])
    pos = Fraction(fraction) * (len(data) - 1)
    lo = int(pos)
    frac = pos - lo
    if frac == 0:
        return Fraction(data[lo])
    return Fraction(data[lo]) + frac * (Fraction(data[lo + 1]) - Fraction(data[lo]))


@dataclass(frozen=True)
class BoxStats:
    mechanism: str
    metric: str
    mean: Fraction
    median: Fraction
    q1: Fraction
    q3: Fraction
    p5: Fraction
    p95: Fraction


def group_stats(
    rows: Iterable[dict], metric: str, order: Sequence[str] = DEFAULT_ORDER
) -> list[BoxStats]:
    values = metric_values(rows, metric)
    stats = []
    for name in order:
        sample = values.get(name, [])
        if not sample:
            raise EmptyGroupError(name, metric)
        stats.append(
            BoxStats(
                mechanism=name,
                metric=metric,
                mean=sum(sample, Fraction(0)) / len(sample),
                median=percentile(sample, Fraction(1, 2)),
                q1=percentile(sample, Fraction(1, 4)),
                q3=percentile(sample, Fraction(3, 4)),
                p5=percentile(sample, Fraction(5, 100)),
                p95=percentile(sample, Fraction(95, 100)),
            )
        )
    return stats
