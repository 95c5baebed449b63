"""Auction mechanisms over a reported diffusion network.

All mechanisms consume only the seller-reachable subgraph and its bids.
The resale-ladder mechanisms (the tax-based one and the classic diffusion
baseline) share one engine; the engine is also reusable with fixed graph
structure so that exhaustive attack searches can sweep bid vectors cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .dominators import DominatorTree, dominator_tree
from .graph import ReachableGraph, _iter_bits, max_bid, reachable_subgraph
from .money import Money, ZERO
from .profile import Report, ReportProfile, VertexId
from .sybil import (
    EdgePriority,
    GammaSet,
    ShortestPathTree,
    cluster_graph,
    compute_gamma,
    prune_graph,
    removed_arcs,
    sample_sp_tree,
    sybil_clusters,
)

RESERVE_AGENT = "__reserve__"


@dataclass(frozen=True)
class Outcome:
    winner: VertexId | None
    payments: Mapping[VertexId, Money]
    revenue: Money
    social_welfare: Money
    trace: Mapping

    def payment(self, vid: VertexId) -> Money:
        return self.payments.get(vid, ZERO)


def _no_sale(g: ReachableGraph, trace: Mapping) -> Outcome:
    payments = {vid: ZERO for vid in g.vertices if vid != g.seller}
    return Outcome(None, payments, ZERO, ZERO, trace)


def _bids_array(g: ReachableGraph, profile: ReportProfile) -> list[Money]:
    return [ZERO if vid == g.seller else profile.reports[vid].bid for vid in g.vertices]


def _finish(
    g: ReachableGraph,
    bids: Sequence[Money],
    winner: int,
    payments: Sequence[tuple[int, Money]],
    trace: Mapping,
) -> Outcome:
    table = {vid: ZERO for vid in g.vertices if vid != g.seller}
    revenue = ZERO
    for idx, amount in payments:
        table[g.vertices[idx]] = amount
        revenue += amount
    return Outcome(g.vertices[winner], table, revenue, bids[winner], trace)


class LadderEngine:
    """Resale ladder along the dominator sequence of the highest bidder.

    ``mode="tax"`` charges each broker her full spread over the identities
    provably not her fakes; ``mode="resale"`` is the classic diffusion
    baseline where the spread is the broker's reward.
    """

    def __init__(
        self,
        g: ReachableGraph,
        mode: str,
        gamma: GammaSet | None = None,
        dom: DominatorTree | None = None,
        strict_winner: bool = True,
    ) -> None:
        assert mode in ("tax", "resale")
        self.g = g
        self.mode = mode
        self.gamma = gamma
        self.strict_winner = strict_winner
        self.dom = dom if dom is not None else dominator_tree(g)
        self._buyers = g.full_mask & ~1
        if mode == "tax":
            assert gamma is not None
            alpha = self.dom.alpha_mask
            beta: list[int] = [0] * g.n
            for v in range(1, g.n):
                u = self.dom.idom_index(v)
                pool = alpha(u) & ~alpha(v) & gamma.mask & ~(1 << u)
                acc = 0
                for y in _iter_bits(pool):
                    acc |= alpha(y)
                beta[v] = acc
            self._beta = beta

    def _plan(self, star: int):
        """Chain and per-rung competitor index lists for a fixed top bidder;
        computed once per star so bid sweeps stay cheap."""
        try:
            cache = self._plans
        except AttributeError:
            cache = self._plans = {}
        plan = cache.get(star)
        if plan is None:
            g = self.g
            alpha = self.dom.alpha_mask
            chain = self.dom.sequence_indices(star)
            ell = len(chain) - 1
            p_idx = [()] * (ell + 1)
            q_idx = [()] * (ell + 1)
            for j in range(1, ell + 1):
                mask = g.full_mask & ~alpha(chain[j])
                p_idx[j] = tuple(_iter_bits(mask & self._buyers))
            for j in range(1, ell):
                if self.mode == "tax":
                    mask = (g.full_mask & ~alpha(chain[j])) | self._beta[chain[j + 1]]
                    q_idx[j] = tuple(_iter_bits(mask & self._buyers))
                else:
                    q_idx[j] = p_idx[j + 1]
            plan = (chain, ell, p_idx, q_idx)
            cache[star] = plan
        return plan

    def settle(self, bids: Sequence[Money]) -> tuple[int, list[tuple[int, Money]]]:
        """(winner index, nonzero payments) without the trace record."""
        n = self.g.n
        if n <= 1:
            return -1, []
        star = 1
        top = bids[1]
        for i in range(2, n):
            if bids[i] > top:
                top, star = bids[i], i
        chain, ell, p_idx, q_idx = self._plan(star)
        strict_tax = self.mode == "tax" and self.strict_winner
        p = [ZERO] * (ell + 1)
        q = [ZERO] * ell
        for j in range(1, ell + 1):
            idx = p_idx[j]
            p[j] = max(bids[i] for i in idx) if idx else ZERO
        d = ell
        for j in range(1, ell):
            idx = q_idx[j]
            q[j] = max(bids[i] for i in idx) if idx else ZERO
            bid = bids[chain[j]]
            if (bid > q[j]) if strict_tax else (bid >= q[j]):
                d = j
                break
        payments = [
            (chain[j], p[j] - q[j]) for j in range(1, d) if p[j] != q[j]
        ]
        payments.append((chain[d], p[d]))
        return chain[d], payments

    def _max(self, bids: Sequence[Money], mask: int) -> Money:
        best = ZERO
        for i in _iter_bits(mask & self._buyers):
            if bids[i] > best:
                best = bids[i]
        return best

    def outcome_raw(
        self, bids: Sequence[Money]
    ) -> tuple[int, list[tuple[int, Money]], dict]:
        """Returns (winner index, nonzero payments, ladder record); winner -1
        when there is no buyer."""
        g = self.g
        if g.n <= 1:
            return -1, [], {"sequence": []}
        top = ZERO
        star = -1
        for i in range(1, g.n):
            if star < 0 or bids[i] > top:
                top, star = bids[i], i
        chain = self.dom.sequence_indices(star)
        ell = len(chain) - 1
        alpha = self.dom.alpha_mask
        full = g.full_mask
        p = [ZERO] * (ell + 1)
        q = [ZERO] * (ell + 1)
        for j in range(1, ell + 1):
            p[j] = self._max(bids, full & ~alpha(chain[j]))
        for j in range(1, ell):
            if self.mode == "tax":
                q[j] = self._max(
                    bids, (full & ~alpha(chain[j])) | self._beta[chain[j + 1]]
                )
            else:
                q[j] = p[j + 1]
            assert p[j] <= q[j] <= p[j + 1]
        q[ell] = self._max(bids, full)

        d = ell
        for j in range(1, ell + 1):
            bid = bids[chain[j]]
            if self.mode == "tax":
                if j == ell:
                    break
                hit = bid > q[j] if self.strict_winner else bid >= q[j]
            else:
                hit = bid >= q[j]
            if hit:
                d = j
                break
        payments = [(chain[j], p[j] - q[j]) for j in range(1, d) if p[j] != q[j]]
        payments.append((chain[d], p[d]))
        record = {
            "sequence": [g.vertices[i] for i in chain],
            "p": p[1:],
            "q": q[1 : ell if self.mode == "tax" else ell + 1],
            "winner_index": d,
        }
        if self.mode == "tax":
            record["beta"] = [
                sorted(g.names(self._beta[chain[j + 1]])) for j in range(1, ell)
            ]
        return chain[d], payments, record


def _gamma_of(engine: LadderEngine, x: int) -> frozenset[VertexId]:
    """Identities inside x's dominated set that are vouched non-fake."""
    dom, gamma, g = engine.dom, engine.gamma, engine.g
    pool = dom.alpha_mask(x) & gamma.mask & ~(1 << x)
    acc = 0
    for y in _iter_bits(pool):
        acc |= dom.alpha_mask(y)
    return g.names(acc)


class VcgEngine:
    def __init__(self, g: ReachableGraph, dom: DominatorTree | None = None) -> None:
        self.g = g
        self.dom = dom if dom is not None else dominator_tree(g)
        self._buyers = g.full_mask & ~1

    def _max(self, bids: Sequence[Money], mask: int) -> Money:
        best = ZERO
        for i in _iter_bits(mask & self._buyers):
            if bids[i] > best:
                best = bids[i]
        return best

    def outcome_raw(
        self, bids: Sequence[Money]
    ) -> tuple[int, list[tuple[int, Money]], dict]:
        g = self.g
        if g.n <= 1:
            return -1, [], {}
        top = ZERO
        star = -1
        for i in range(1, g.n):
            if star < 0 or bids[i] > top:
                top, star = bids[i], i
        alpha = self.dom.alpha_mask
        full = g.full_mask
        overall = self._max(bids, full)
        chain = self.dom.sequence_indices(star)
        payments: list[tuple[int, Money]] = []
        for j in range(1, len(chain) - 1):
            reward = self._max(bids, full & ~alpha(chain[j])) - overall
            if reward != 0:
                payments.append((chain[j], reward))
        payments.append((star, self._max(bids, full & ~alpha(star))))
        return star, payments, {"sequence": [g.vertices[i] for i in chain]}

    def settle(self, bids: Sequence[Money]) -> tuple[int, list[tuple[int, Money]]]:
        winner, payments, _ = self.outcome_raw(bids)
        return winner, payments


class NspEngine:
    def __init__(self, g: ReachableGraph, neighbors_mask: int) -> None:
        self.g = g
        self.mask = neighbors_mask

    def outcome_raw(
        self, bids: Sequence[Money]
    ) -> tuple[int, list[tuple[int, Money]], dict]:
        best = ZERO
        star = -1
        for i in _iter_bits(self.mask):
            if star < 0 or bids[i] > best:
                best, star = bids[i], i
        if star < 0:
            return -1, [], {}
        price = ZERO
        for i in _iter_bits(self.mask & ~(1 << star)):
            if bids[i] > price:
                price = bids[i]
        return star, [(star, price)], {}

    def settle(self, bids: Sequence[Money]) -> tuple[int, list[tuple[int, Money]]]:
        winner, payments, _ = self.outcome_raw(bids)
        return winner, payments


def run_nsp(profile: ReportProfile) -> Outcome:
    g = reachable_subgraph(profile)
    trace = {"mechanism": "nsp"}
    if not profile.seller_neighbors:
        return _no_sale(g, trace)
    bids = _bids_array(g, profile)
    engine = NspEngine(g, g.mask_of(profile.seller_neighbors))
    winner, payments, _ = engine.outcome_raw(bids)
    return _finish(g, bids, winner, payments, trace)


def run_vcg(profile: ReportProfile) -> Outcome:
    g = reachable_subgraph(profile)
    trace = {"mechanism": "vcg"}
    if g.n <= 1:
        return _no_sale(g, trace)
    bids = _bids_array(g, profile)
    winner, payments, record = VcgEngine(g).outcome_raw(bids)
    trace.update(record)
    return _finish(g, bids, winner, payments, trace)


def run_idm(profile: ReportProfile) -> Outcome:
    g = reachable_subgraph(profile)
    trace = {"mechanism": "idm"}
    if g.n <= 1:
        return _no_sale(g, trace)
    bids = _bids_array(g, profile)
    winner, payments, record = LadderEngine(g, "resale").outcome_raw(bids)
    trace.update(record)
    return _finish(g, bids, winner, payments, trace)


def run_stm_on(
    g: ReachableGraph,
    gamma: GammaSet,
    profile: ReportProfile,
    strict_winner: bool = True,
) -> Outcome:
    """Tax-ladder run against a pre-built graph and trusted set (reused by
    the cluster mechanism and the reserve-price variant)."""
    trace: dict = {"mechanism": "stm", "gamma": sorted(gamma.members)}
    if g.n <= 1:
        return _no_sale(g, trace)
    bids = _bids_array(g, profile)
    engine = LadderEngine(g, "tax", gamma, strict_winner=strict_winner)
    winner, payments, record = engine.outcome_raw(bids)
    record["gamma_of_sequence"] = [
        sorted(_gamma_of(engine, i))
        for i in (g.index[v] for v in record["sequence"][1:])
    ]
    trace.update(record)
    return _finish(g, bids, winner, payments, trace)


def run_stm(profile: ReportProfile, strict_winner: bool = True) -> Outcome:
    g = reachable_subgraph(profile)
    return run_stm_on(g, compute_gamma(g, profile), profile, strict_winner)


def run_stm_reserve(
    profile: ReportProfile, kappa: Money, strict_winner: bool = True
) -> Outcome:
    """Reserve-price variant: an auxiliary seller-side agent bids the
    reserve; if she wins, the item is kept and nobody pays."""
    if RESERVE_AGENT in profile.reports:
        raise ValueError(f"profile already uses the reserved id {RESERVE_AGENT!r}")
    augmented = ReportProfile(
        seller=profile.seller,
        seller_neighbors=profile.seller_neighbors | {RESERVE_AGENT},
        gamma0=profile.gamma0,
        reports={**profile.reports, RESERVE_AGENT: Report(kappa, frozenset())},
    )
    inner = run_stm(augmented, strict_winner)
    trace = {"mechanism": "stm-reserve", "kappa": kappa, "inner": inner.trace}
    if inner.winner == RESERVE_AGENT:
        trace["reserved"] = True
        payments = {v: ZERO for v in inner.payments if v != RESERVE_AGENT}
        return Outcome(None, payments, ZERO, ZERO, trace)
    trace["reserved"] = False
    payments = {v: t for v, t in inner.payments.items() if v != RESERVE_AGENT}
    return Outcome(inner.winner, payments, inner.revenue, inner.social_welfare, trace)


def run_scm(
    profile: ReportProfile,
    randomness: EdgePriority,
    strict_winner: bool = True,
) -> Outcome:
    g = reachable_subgraph(profile)
    if g.n <= 1:
        return _no_sale(g, {"mechanism": "scm"})
    gamma = compute_gamma(g, profile)
    parts = sybil_clusters(g, gamma)
    h = cluster_graph(g, parts)
    tree = sample_sp_tree(h, randomness)
    dropped = removed_arcs(g, parts, tree)
    pruned = prune_graph(g, parts, tree)
    inner = run_stm_on(pruned, gamma, profile, strict_winner)
    trace = {
        "mechanism": "scm",
        "tree": {child: parent for child, parent in sorted(tree.parent.items())},
        "removed_arcs": sorted(dropped),
        "clusters": {root: sorted(parts[root]) for root in parts.roots()},
        "inner": inner.trace,
    }
    return Outcome(
        inner.winner, inner.payments, inner.revenue, inner.social_welfare, trace
    )


def run_osm(profile: ReportProfile) -> Outcome:
    """Baseline that drops every suspect identity, then resells among the
    trusted: demonstrably manipulable by strategic under-diffusion."""
    g = reachable_subgraph(profile)
    trace: dict = {"mechanism": "osm"}
    if g.n <= 1:
        return _no_sale(g, trace)
    gamma = compute_gamma(g, profile)
    adjacency = {
        u: [v for v in g.names(g.succ[g.index[u]]) if v in gamma]
        for u in gamma.members
    }
    induced = ReachableGraph.from_arcs(g.seller, adjacency)
    trace["gamma"] = sorted(gamma.members)
    if induced.n <= 1:
        return _no_sale(g, trace)
    bids = _bids_array(induced, profile)
    winner, payments, record = LadderEngine(induced, "resale").outcome_raw(bids)
    trace.update(record)
    inner = _finish(induced, bids, winner, payments, trace)
    table = {vid: ZERO for vid in g.vertices if vid != g.seller}
    table.update(inner.payments)
    return Outcome(inner.winner, table, inner.revenue, inner.social_welfare, trace)
