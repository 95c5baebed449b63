"""Sybil analysis: trusted-set closure, clusters, and graph pruning.

The trusted set starts from the seller, her neighbors, and any externally
vouched identities, then closes under meeting points: a vertex reachable by
two vertex-disjoint paths from two distinct trusted vertices cannot be a
fake identity, so it joins the set.  Clusters then partition the reachable
graph into per-root suspicion neighborhoods.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .graph import FlowChecker, GraphError, ReachableGraph, _iter_bits
from .profile import ReportProfile, VertexId

log = logging.getLogger(__name__)

Provenance = tuple  # ("seller",) | ("neighbor",) | ("gamma0",) | ("closure", x, y)


@dataclass(frozen=True, eq=False)
class GammaSet:
    members: frozenset[VertexId]
    provenance: Mapping[VertexId, Provenance]
    mask: int

    def __contains__(self, vid: VertexId) -> bool:
        return vid in self.members

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GammaSet):
            return self.members == other.members
        if isinstance(other, (set, frozenset)):
            return self.members == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.members)


def compute_gamma(g: ReachableGraph, profile: ReportProfile) -> GammaSet:
    """Least fixed point of the meeting-point closure over the seed set."""
    provenance: dict[VertexId, Provenance] = {g.seller: ("seller",)}
    mask = 1
    for vid in profile.seller_neighbors:
        if vid in g.index:
            provenance.setdefault(vid, ("neighbor",))
            mask |= 1 << g.index[vid]
    for vid in sorted(profile.gamma0):
        if vid not in g.index:
            log.warning("trusted identity %r is unreachable; dropped", vid)
            continue
        provenance.setdefault(vid, ("gamma0",))
        mask |= 1 << g.index[vid]

    checker = FlowChecker(g)
    while True:
        added: list[tuple[int, list[int]]] = []
        for z in _iter_bits(g.full_mask & ~mask):
            flow, entries = checker.two_paths(mask, z)
            if flow >= 2:
                added.append((z, entries))
        if not added:
            break
        for z, entries in added:
            pair = sorted(g.vertices[i] for i in entries[:2])
            provenance[g.vertices[z]] = ("closure", *pair)
            mask |= 1 << z
    return GammaSet(frozenset(provenance), provenance, mask)


@dataclass(frozen=True, eq=False)
class SybilClusterPartition:
    clusters: Mapping[VertexId, frozenset[VertexId]]
    masks: Mapping[VertexId, int]
    root_of: Mapping[VertexId, VertexId]

    def __getitem__(self, root: VertexId) -> frozenset[VertexId]:
        return self.clusters[root]

    def roots(self) -> tuple[VertexId, ...]:
        return tuple(sorted(self.clusters))


def sybil_clusters(g: ReachableGraph, gamma: GammaSet) -> SybilClusterPartition:
    """Partition into per-root clusters via trusted-set-avoiding traversal."""
    clusters: dict[VertexId, frozenset[VertexId]] = {}
    masks: dict[VertexId, int] = {}
    root_of: dict[VertexId, VertexId] = {}
    for root in sorted(gamma.members, key=g.index.__getitem__):
        ri = g.index[root]
        cluster = 1 << ri
        frontier = cluster
        while frontier:
            grown = 0
            for u in _iter_bits(frontier):
                grown |= g.succ[u]
            frontier = grown & ~gamma.mask & ~cluster
            cluster |= frontier
        clusters[root] = g.names(cluster)
        masks[root] = cluster
        for member in clusters[root]:
            root_of[member] = root
    return SybilClusterPartition(clusters, masks, root_of)


@dataclass(frozen=True)
class ClusterGraph:
    """Quotient network over cluster roots."""

    g: ReachableGraph  # vertex ids are the cluster roots


def cluster_graph(g: ReachableGraph, parts: SybilClusterPartition) -> ClusterGraph:
    adjacency: dict[VertexId, set[VertexId]] = {r: set() for r in parts.clusters}
    for u, v in g.arcs():
        ru, rv = parts.root_of[u], parts.root_of[v]
        if ru == rv:
            continue
        # every inter-cluster arc must land on the target cluster's root
        if v != rv:
            raise GraphError(
                f"inter-cluster arc ({u!r}, {v!r}) misses root {rv!r}"
            )
        adjacency[ru].add(rv)
    return ClusterGraph(ReachableGraph.from_arcs(g.seller, adjacency))


class EdgePriority:
    """Deterministic tie-free priorities over (child, candidate-parent) pairs.

    Either materialized lazily from a 64-bit seed via keyed hashing, or
    supplied explicitly for derandomized runs.
    """

    _SCALE = 1 << 64

    def __init__(
        self,
        seed: int | None = None,
        explicit: Mapping[tuple[VertexId, VertexId], Fraction] | None = None,
    ) -> None:
        if (seed is None) == (explicit is None):
            raise ValueError("provide exactly one of seed or explicit priorities")
        self._seed = seed
        self._explicit = dict(explicit) if explicit is not None else None

    @classmethod
    def from_seed(cls, seed: int) -> "EdgePriority":
        return cls(seed=seed)

    @classmethod
    def from_ordering(
        cls, pairs: list[tuple[VertexId, VertexId]]
    ) -> "EdgePriority":
        """Explicit priorities: earlier pairs in the list are preferred."""
        total = len(pairs) + 1
        return cls(
            explicit={pair: Fraction(i + 1, total + 1) for i, pair in enumerate(pairs)}
        )

    def value(self, child: VertexId, parent: VertexId) -> Fraction:
        if self._explicit is not None:
            try:
                return self._explicit[(child, parent)]
            except KeyError:
                # unlisted pairs rank strictly after every listed one
                return 1 + self._hashed(child, parent, key=b"unlisted")
        return self._hashed(
            child, parent, key=self._seed.to_bytes(8, "big", signed=False)
        )

    def _hashed(self, child: VertexId, parent: VertexId, key: bytes) -> Fraction:
        digest = hashlib.blake2b(
            f"{child}\x00{parent}".encode(), digest_size=8, key=key
        ).digest()
        return Fraction(2 * int.from_bytes(digest, "big") + 1, 2 * self._SCALE)


@dataclass(frozen=True)
class ShortestPathTree:
    parent: Mapping[VertexId, VertexId]
    dist: Mapping[VertexId, int]

    def arcs(self) -> frozenset[tuple[VertexId, VertexId]]:
        return frozenset((p, c) for c, p in self.parent.items())


def sample_sp_tree(h: ClusterGraph, prio: EdgePriority) -> ShortestPathTree:
    """Pick, per vertex, the minimum-priority parent among the candidates
    that preserve its breadth-first distance from the seller."""
    g = h.g
    dist = {g.seller: 0}
    frontier = [g.seller]
    level = 0
    while frontier:
        level += 1
        nxt = []
        for u in frontier:
            for vi in _iter_bits(g.succ[g.index[u]]):
                v = g.vertices[vi]
                if v not in dist:
                    dist[v] = level
                    nxt.append(v)
        frontier = nxt
    if len(dist) != g.n:
        raise GraphError("cluster graph is not seller-reachable")

    parent: dict[VertexId, VertexId] = {}
    for x in g.vertices:
        if x == g.seller:
            continue
        candidates = [
            g.vertices[yi]
            for yi in _iter_bits(g.pred[g.index[x]])
            if dist[g.vertices[yi]] + 1 == dist[x]
        ]
        if len(candidates) == 1:
            parent[x] = candidates[0]
            continue
        keyed = sorted((prio.value(x, y), y) for y in candidates)
        if keyed[0][0] == keyed[1][0]:
            raise GraphError(f"priority tie among parents of {x!r}")
        parent[x] = keyed[0][1]
    return ShortestPathTree(parent, dist)


def prune_graph(
    g: ReachableGraph, parts: SybilClusterPartition, tree: ShortestPathTree
) -> ReachableGraph:
    """Drop inter-cluster arcs that do not follow the sampled tree."""
    removed = []
    for u, v in g.arcs():
        ru, rv = parts.root_of[u], parts.root_of[v]
        if ru != rv and tree.parent.get(rv) != ru:
            removed.append((u, v))
    pruned = g.without_arcs(removed)
    if pruned.n != g.n:
        raise GraphError("pruning disconnected the reachable graph")
    return pruned


def removed_arcs(
    g: ReachableGraph, parts: SybilClusterPartition, tree: ShortestPathTree
) -> list[tuple[VertexId, VertexId]]:
    return [
        (u, v)
        for u, v in g.arcs()
        if parts.root_of[u] != parts.root_of[v]
        and tree.parent.get(parts.root_of[v]) != parts.root_of[u]
    ]
