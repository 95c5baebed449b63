"""Directed graph core.

Vertex sets are manipulated as integer bitmasks over a per-graph vertex
indexing (seller at index 0, buyers in sorted order), which keeps the
exhaustive-search harness fast without a second implementation for small
graphs.  Self-loops are tolerated and ignored; arcs into the seller are
tolerated and are irrelevant to anything computed from the seller side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .money import Money, ZERO
from .profile import ProfileError, ReportProfile, VertexId


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ReachableGraph:
    """The subgraph induced by the vertices reachable from the seller."""

    seller: VertexId
    vertices: tuple[VertexId, ...]
    index: Mapping[VertexId, int]
    succ: tuple[int, ...]
    pred: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.vertices)) - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReachableGraph):
            return NotImplemented
        return (
            self.seller == other.seller
            and self.vertices == other.vertices
            and self.succ == other.succ
        )

    def __hash__(self) -> int:
        return hash((self.seller, self.vertices, self.succ))

    def __contains__(self, vid: VertexId) -> bool:
        return vid in self.index

    def vertex_set(self) -> frozenset[VertexId]:
        return frozenset(self.vertices)

    def arcs(self) -> list[tuple[VertexId, VertexId]]:
        out = []
        for u in range(self.n):
            for v in _iter_bits(self.succ[u]):
                out.append((self.vertices[u], self.vertices[v]))
        return out

    def names(self, mask: int) -> frozenset[VertexId]:
        return frozenset(self.vertices[i] for i in _iter_bits(mask))

    def mask_of(self, ids: Iterable[VertexId]) -> int:
        mask = 0
        for vid in ids:
            mask |= 1 << self.index[vid]
        return mask

    @classmethod
    def from_arcs(
        cls, seller: VertexId, adjacency: Mapping[VertexId, Iterable[VertexId]]
    ) -> "ReachableGraph":
        """Build the seller-reachable subgraph of an arbitrary arc relation."""
        reached = {seller}
        frontier = [seller]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adjacency.get(u, ()):
                    if v not in reached:
                        reached.add(v)
                        nxt.append(v)
            frontier = nxt
        vertices = (seller, *sorted(reached - {seller}))
        index = {vid: i for i, vid in enumerate(vertices)}
        succ = [0] * len(vertices)
        pred = [0] * len(vertices)
        for u in vertices:
            ui = index[u]
            for v in adjacency.get(u, ()):
                if v == u or v not in index:
                    continue
                vi = index[v]
                succ[ui] |= 1 << vi
                pred[vi] |= 1 << ui
        return cls(seller, vertices, index, tuple(succ), tuple(pred))

    def without_arcs(self, removed: Iterable[tuple[VertexId, VertexId]]) -> "ReachableGraph":
        gone: dict[int, int] = {}
        for u, v in removed:
            gone[self.index[u]] = gone.get(self.index[u], 0) | (1 << self.index[v])
        adjacency = {
            self.vertices[u]: [
                self.vertices[v]
                for v in _iter_bits(self.succ[u] & ~gone.get(u, 0))
            ]
            for u in range(self.n)
        }
        return ReachableGraph.from_arcs(self.seller, adjacency)


def reachable_subgraph(profile: ReportProfile) -> ReachableGraph:
    """The part of the reported network the mechanism is allowed to see."""
    adjacency: dict[VertexId, Iterable[VertexId]] = {
        profile.seller: profile.seller_neighbors
    }
    for vid, report in profile.reports.items():
        adjacency[vid] = report.diffuse
    return ReachableGraph.from_arcs(profile.seller, adjacency)


def max_bid(profile: ReportProfile, vs: Iterable[VertexId]) -> Money:
    """Highest bid among ``vs``; the seller carries no bid and an empty
    competitor set floors at zero."""
    best = ZERO
    for vid in vs:
        if vid == profile.seller:
            continue
        bid = profile.reports[vid].bid
        if bid > best:
            best = bid
    return best


class FlowChecker:
    """Reusable two-unit max-flow test with unit vertex capacities.

    Vertices are split into in/out halves; a query asks whether two fully
    vertex-disjoint paths (sharing only the target) exist from a source set
    into a target.  Used for meeting-point detection.
    """

    def __init__(self, g: ReachableGraph) -> None:
        self.g = g
        n = g.n
        self.source = 2 * n
        heads: list[int] = []
        adj: list[list[int]] = [[] for _ in range(2 * n + 1)]
        base: list[int] = []

        def add_arc(u: int, v: int, cap: int) -> None:
            adj[u].append(len(heads))
            heads.append(v)
            base.append(cap)
            adj[v].append(len(heads))
            heads.append(u)
            base.append(0)

        self._split_arcs = []
        for v in range(n):
            self._split_arcs.append(len(heads))
            add_arc(2 * v, 2 * v + 1, 1)
        for u in range(n):
            for v in _iter_bits(g.succ[u]):
                add_arc(2 * u + 1, 2 * v, 1)
        self._source_arcs = []
        for v in range(n):
            self._source_arcs.append(len(heads))
            add_arc(self.source, 2 * v, 0)
        self._heads = heads
        self._adj = adj
        self._base = base

    def two_paths(self, sources_mask: int, target: int) -> tuple[int, list[int]]:
        """Max flow (capped at 2) from the source set to ``target``, plus the
        source vertices actually used by the augmenting paths."""
        cap = list(self._base)
        for v in _iter_bits(sources_mask):
            cap[self._source_arcs[v]] = 1
        cap[self._split_arcs[target]] = 2
        sink = 2 * target + 1
        heads, adj = self._heads, self._adj
        flow = 0
        for _ in range(2):
            parent = {self.source: -1}
            queue = [self.source]
            found = False
            while queue and not found:
                nxt = []
                for u in queue:
                    for arc in adj[u]:
                        if cap[arc] <= 0:
                            continue
                        v = heads[arc]
                        if v in parent:
                            continue
                        parent[v] = arc
                        if v == sink:
                            found = True
                            break
                        nxt.append(v)
                    if found:
                        break
                queue = nxt
            if not found:
                break
            node = sink
            while node != self.source:
                arc = parent[node]
                cap[arc] -= 1
                cap[arc ^ 1] += 1
                node = heads[arc ^ 1]
            flow += 1
        entries = [
            v
            for v in _iter_bits(sources_mask)
            if cap[self._source_arcs[v]] == 0
        ]
        return flow, entries


def two_disjoint_paths(
    g: ReachableGraph, x: VertexId, y: VertexId, z: VertexId
) -> bool:
    """True iff there are paths x->z and y->z sharing no vertex except z."""
    for vid in (x, y, z):
        if vid not in g.index:
            raise GraphError(f"unknown vertex {vid!r}")
    if x == y:
        raise GraphError("meeting-point test requires two distinct origins")
    checker = FlowChecker(g)
    sources = (1 << g.index[x]) | (1 << g.index[y])
    flow, _ = checker.two_paths(sources, g.index[z])
    return flow >= 2


def validate_profile_graph(profile: ReportProfile) -> ReachableGraph:
    """Validate and build in one step; re-raises with vertex context."""
    try:
        return reachable_subgraph(profile)
    except KeyError as exc:  # pragma: no cover - profile validation catches first
        raise ProfileError(f"dangling vertex id {exc.args[0]!r}") from None
