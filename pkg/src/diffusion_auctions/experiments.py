"""Batch evaluation on random preferential-attachment networks.

Graphs follow Price's model with an (m+1)-clique seed and the in-degree+1
attachment kernel; every attachment arc is mirrored so the whole network
stays seller-reachable. Values are uniform on [0,1], quantized to nine
decimal digits and then held exactly.
"""

from __future__ import annotations

import csv
import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

from .dominators import dominator_tree
from .graph import ReachableGraph, reachable_subgraph
from .mechanisms import (
    LadderEngine,
    NspEngine,
    VcgEngine,
    _bids_array,
    _finish,
    _no_sale,
    run_stm_on,
)
from .money import Money, format_money
from .profile import Report, ReportProfile
from .sybil import (
    EdgePriority,
    cluster_graph,
    compute_gamma,
    prune_graph,
    sample_sp_tree,
    sybil_clusters,
)

RESULT_FIELDS = (
    "seed",
    "n",
    "m",
    "trial",
    "mechanism",
    "social_welfare",
    "revenue",
    "optimal_welfare",
)
SUMMARY_FIELDS = ("mechanism", "metric", "mean", "median", "q1", "q3", "p5", "p95")
DEFAULT_MECHANISMS = ("nsp", "stm", "scm", "idm", "vcg")

_VALUE_DENOM = 10**9


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class PriceModelParams:
    n: int
    m: int
    seed: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ExperimentError(f"attachment degree must be >= 1, got {self.m}")
        if self.n < self.m + 1:
            raise ExperimentError(
                f"need at least m+1 = {self.m + 1} vertices, got n = {self.n}"
            )
        if not 0 <= self.seed < 2**64:
            raise ExperimentError("seed must fit in 64 bits")


@dataclass(frozen=True)
class ExperimentConfig:
    params: PriceModelParams
    trials: int
    mechanisms: tuple[str, ...] = DEFAULT_MECHANISMS

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ExperimentError("trials must be >= 1")
        unknown = [m for m in self.mechanisms if m not in DEFAULT_MECHANISMS]
        if unknown:
            raise ExperimentError(f"unknown mechanisms: {unknown}")
        if len(set(self.mechanisms)) != len(self.mechanisms):
            raise ExperimentError("duplicate mechanism names")


@dataclass(frozen=True)
class ResultRow:
    seed: int
    n: int
    m: int
    trial: int
    mechanism: str
    social_welfare: Money
    revenue: Money
    optimal_welfare: Money


@dataclass(frozen=True)
class SummaryStats:
    mechanism: str
    metric: str
    mean: Fraction
    median: Fraction
    q1: Fraction
    q3: Fraction
    p5: Fraction
    p95: Fraction


def _derive(master: int, *parts) -> int:
    """Stable 64-bit stream split, independent of PYTHONHASHSEED."""
    text = ":".join([str(master), *map(str, parts)])
    return int.from_bytes(
        hashlib.blake2b(text.encode(), digest_size=8).digest(), "big"
    )


def generate_price_graph(params: PriceModelParams) -> ReportProfile:
    """Network skeleton with all bids zero; vertex "0" is the seller."""
    rng = random.Random(params.seed)
    n, m = params.n, params.m
    neighbors: list[set[int]] = [set() for _ in range(n)]
    weights = [0] * n  # in-degree + 1 kernel, mirrored arcs count once each
    for i in range(m + 1):
        for j in range(m + 1):
            if i != j:
                neighbors[i].add(j)
        weights[i] = m + 1
    population = list(range(m + 1))
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            (u,) = rng.choices(population, weights=[weights[i] for i in population])
            targets.add(u)
        for u in targets:
            neighbors[v].add(u)
            neighbors[u].add(v)
            weights[u] += 1
        weights[v] = m + 1
        population.append(v)
    reports = {
        str(v): Report(Fraction(0), frozenset(str(u) for u in neighbors[v] if u != 0))
        for v in range(1, n)
    }
    return ReportProfile(
        seller="0",
        seller_neighbors=frozenset(str(u) for u in neighbors[0]),
        gamma0=frozenset(),
        reports=reports,
    )


def sample_values(skeleton: ReportProfile, seed: int) -> ReportProfile:
    """Fill every bid with an exact 9-decimal draw from U[0,1]."""
    rng = random.Random(seed)
    reports = {}
    for vid in sorted(skeleton.reports):
        value = Fraction(round(rng.random() * _VALUE_DENOM), _VALUE_DENOM)
        reports[vid] = Report(value, skeleton.reports[vid].diffuse)
    return ReportProfile(
        seller=skeleton.seller,
        seller_neighbors=skeleton.seller_neighbors,
        gamma0=skeleton.gamma0,
        reports=reports,
    )


def _trial_outcomes(profile: ReportProfile, mechanisms, priority_seed: int):
    """Run the requested mechanisms off one shared structural analysis."""
    g = reachable_subgraph(profile)
    if g.n <= 1:
        empty = _no_sale(g, {})
        return {name: empty for name in mechanisms}, Fraction(0)
    bids = _bids_array(g, profile)
    optimal = max(bids[1:], default=Fraction(0))
    dom = dominator_tree(g)
    need_gamma = "stm" in mechanisms or "scm" in mechanisms
    gamma = compute_gamma(g, profile) if need_gamma else None
    out = {}
    for name in mechanisms:
        if name == "nsp":
            engine = NspEngine(g, g.mask_of(profile.seller_neighbors))
            winner, payments, _ = engine.outcome_raw(bids)
            out[name] = _finish(g, bids, winner, payments, {})
        elif name == "vcg":
            winner, payments, _ = VcgEngine(g, dom).outcome_raw(bids)
            out[name] = _finish(g, bids, winner, payments, {})
        elif name == "idm":
            engine = LadderEngine(g, "resale", dom=dom)
            winner, payments, _ = engine.outcome_raw(bids)
            out[name] = _finish(g, bids, winner, payments, {})
        elif name == "stm":
            engine = LadderEngine(g, "tax", gamma, dom=dom)
            winner, payments, _ = engine.outcome_raw(bids)
            out[name] = _finish(g, bids, winner, payments, {})
        elif name == "scm":
            parts = sybil_clusters(g, gamma)
            tree = sample_sp_tree(
                cluster_graph(g, parts), EdgePriority.from_seed(priority_seed)
            )
            pruned = prune_graph(g, parts, tree)
            out[name] = run_stm_on(pruned, gamma, profile)
        else:  # pragma: no cover - guarded by ExperimentConfig
            raise ExperimentError(f"unknown mechanism {name!r}")
    return out, optimal


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    params = config.params
    rows: list[ResultRow] = []
    for trial in range(config.trials):
        skeleton = generate_price_graph(
            PriceModelParams(params.n, params.m, _derive(params.seed, trial, "graph"))
        )
        profile = sample_values(skeleton, _derive(params.seed, trial, "values"))
        outcomes, optimal = _trial_outcomes(
            profile, config.mechanisms, _derive(params.seed, trial, "priority")
        )
        for name in config.mechanisms:
            out = outcomes[name]
            rows.append(
                ResultRow(
                    seed=params.seed,
                    n=params.n,
                    m=params.m,
                    trial=trial,
                    mechanism=name,
                    social_welfare=out.social_welfare,
                    revenue=out.revenue,
                    optimal_welfare=optimal,
                )
            )
    rows.sort(key=lambda r: (r.trial, r.mechanism))
    return rows


def percentile(sample: Sequence[Fraction], fraction: Fraction) -> Fraction:
    """Linear interpolation between closest ranks on the sorted sample."""
    if not sample:
        raise ExperimentError("empty sample")
    data = sorted(sample)
    if len(data) == 1:
        return Fraction(data[0])
    pos = Fraction(fraction) * (len(data) - 1)
    lo = int(pos)
    frac = pos - lo
    if frac == 0:
        return Fraction(data[lo])
    return Fraction(data[lo]) + frac * (Fraction(data[lo + 1]) - Fraction(data[lo]))


def _stats(mechanism: str, metric: str, values: Sequence[Fraction]) -> SummaryStats:
    if not values:
        raise ExperimentError(f"no rows for {mechanism}/{metric}")
    return SummaryStats(
        mechanism=mechanism,
        metric=metric,
        mean=sum(values, Fraction(0)) / len(values),
        median=percentile(values, Fraction(1, 2)),
        q1=percentile(values, Fraction(1, 4)),
        q3=percentile(values, Fraction(3, 4)),
        p5=percentile(values, Fraction(5, 100)),
        p95=percentile(values, Fraction(95, 100)),
    )


def summarize(rows: Iterable[ResultRow]) -> list[SummaryStats]:
    groups: dict[str, list[ResultRow]] = {}
    order: list[str] = []
    for row in rows:
        if row.mechanism not in groups:
            groups[row.mechanism] = []
            order.append(row.mechanism)
        groups[row.mechanism].append(row)
    if not groups:
        raise ExperimentError("no rows to summarize")
    stats = []
    for name in order:
        group = groups[name]
        stats.append(_stats(name, "social_welfare", [r.social_welfare for r in group]))
        stats.append(_stats(name, "revenue", [r.revenue for r in group]))
        # reserved / no-sale outcomes carry no meaningful efficiency ratio
        ratios = [
            r.social_welfare / r.optimal_welfare
            for r in group
            if r.social_welfare != 0 and r.optimal_welfare != 0
        ]
        if ratios:
            stats.append(_stats(name, "ratio", ratios))
    return stats


def write_results(rows: Iterable[ResultRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RESULT_FIELDS)
    for r in rows:
        writer.writerow(
            [
                r.seed,
                r.n,
                r.m,
                r.trial,
                r.mechanism,
                format_money(r.social_welfare),
                format_money(r.revenue),
                format_money(r.optimal_welfare),
            ]
        )


def write_summary(stats: Iterable[SummaryStats], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for s in stats:
        writer.writerow(
            [
                s.mechanism,
                s.metric,
                format_money(s.mean),
                format_money(s.median),
                format_money(s.q1),
                format_money(s.q3),
                format_money(s.p5),
                format_money(s.p95),
            ]
        )


def read_results(stream: TextIO) -> list[ResultRow]:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or tuple(reader.fieldnames) != RESULT_FIELDS:
        raise ExperimentError(f"expected header {','.join(RESULT_FIELDS)}")
    rows = []
    for rec in reader:
        rows.append(
            ResultRow(
                seed=int(rec["seed"]),
                n=int(rec["n"]),
                m=int(rec["m"]),
                trial=int(rec["trial"]),
                mechanism=rec["mechanism"],
                social_welfare=Fraction(rec["social_welfare"]),
                revenue=Fraction(rec["revenue"]),
                optimal_welfare=Fraction(rec["optimal_welfare"]),
            )
        )
    return rows
