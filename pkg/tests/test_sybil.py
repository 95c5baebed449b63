import logging

import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from diffusion_auctions import (
    EdgePriority,
    GraphError,
    ReachableGraph,
    build_profile,
    cluster_graph,
    compute_gamma,
    dominator_tree,
    prune_graph,
    reachable_subgraph,
    sample_sp_tree,
    sybil_clusters,
)
from diffusion_auctions import fixtures

from oracles import gamma_oracle
from strategies import profiles


def adjacency_of(p):
    adj = {p.seller: set(p.seller_neighbors)}
    for vid, rep in p.reports.items():
        adj[vid] = set(rep.diffuse)
    return adj


# ---------------------------------------------------------------- trusted set


def test_gamma_funnel():
    p = fixtures.load("funnel")
    g = reachable_subgraph(p)
    assert compute_gamma(g, p) == {"s", "a", "b"}


def test_gamma_diamond_everyone():
    p = fixtures.load("diamond")
    g = reachable_subgraph(p)
    gamma = compute_gamma(g, p)
    assert gamma == {"s", "a", "b", "c", "d"}
    # c and d are meeting points of a and b
    assert gamma.provenance["c"][0] == "closure"
    assert gamma.provenance["d"][0] == "closure"


def test_gamma_bridge():
    p = fixtures.load("bridge")
    g = reachable_subgraph(p)
    assert compute_gamma(g, p) == {"s", "x", "a"}


def test_gamma0_extends_the_seed():
    p = build_profile(
        "s", ["a"], {"a": (1, ["b"]), "b": (1, [])}, gamma0=["b"]
    )
    g = reachable_subgraph(p)
    assert compute_gamma(g, p) == {"s", "a", "b"}


def test_unreachable_gamma0_dropped_with_warning(caplog):
    p = build_profile("s", ["a"], {"a": (1, []), "b": (1, [])}, gamma0=["b"])
    g = reachable_subgraph(p)
    with caplog.at_level(logging.WARNING):
        gamma = compute_gamma(g, p)
    assert gamma == {"s", "a"}
    assert any("'b'" in rec.message for rec in caplog.records)


@given(profiles(max_buyers=6, with_gamma0=True))
def test_gamma_matches_enumeration_oracle(p):
    g = reachable_subgraph(p)
    gamma = compute_gamma(g, p)
    want = gamma_oracle(adjacency_of(p), p.seller, p.seller_neighbors, p.gamma0)
    assert gamma == want


@given(profiles(max_buyers=8))
def test_empty_gamma0_equals_children_of_seller(p):
    # without outside vouching the trusted set is exactly the seller plus
    # the vertices whose immediate dominator is the seller
    g = reachable_subgraph(p)
    t = dominator_tree(g)
    want = {p.seller} | {
        x for x in g.vertices if x != p.seller and t.idom(x) == p.seller
    }
    assert compute_gamma(g, p) == want


# ------------------------------------------------------------------- clusters


def test_clusters_funnel():
    p = fixtures.load("funnel")
    g = reachable_subgraph(p)
    parts = sybil_clusters(g, compute_gamma(g, p))
    assert parts["s"] == {"s"}
    assert parts["a"] == {"a", "c", "d"}
    assert parts["b"] == {"b"}


@given(profiles(max_buyers=7, with_gamma0=True))
def test_clusters_cover_some_partition(p):
    g = reachable_subgraph(p)
    gamma = compute_gamma(g, p)
    parts = sybil_clusters(g, gamma)
    seen = []
    for root in parts.roots():
        assert root in parts[root]
        seen.extend(parts[root])
    # pairwise disjoint and jointly exhaustive
    assert len(seen) == len(set(seen)) == g.n


@given(profiles(max_buyers=7, with_gamma0=True))
def test_inter_cluster_arcs_hit_roots(p):
    g = reachable_subgraph(p)
    parts = sybil_clusters(g, compute_gamma(g, p))
    for u, v in g.arcs():
        if parts.root_of[u] != parts.root_of[v]:
            assert v == parts.root_of[v], (u, v)


def test_cluster_graph_funnel():
    p = fixtures.load("funnel")
    g = reachable_subgraph(p)
    parts = sybil_clusters(g, compute_gamma(g, p))
    h = cluster_graph(g, parts)
    assert set(h.g.arcs()) == {("s", "a"), ("s", "b")}


def test_cluster_graph_rejects_non_root_target():
    g = ReachableGraph.from_arcs("s", {"s": ["a"], "a": ["b"], "b": []})

    class FakeParts:
        clusters = {"s": frozenset({"s", "b"}), "a": frozenset({"a"})}
        root_of = {"s": "s", "b": "s", "a": "a"}

    with pytest.raises(GraphError, match="misses root"):
        cluster_graph(g, FakeParts())


# ------------------------------------------------------------- tree sampling


def test_priority_requires_exactly_one_source():
    with pytest.raises(ValueError):
        EdgePriority()
    with pytest.raises(ValueError):
        EdgePriority(seed=1, explicit={})


def test_seeded_priority_deterministic_and_in_unit_interval():
    p1 = EdgePriority.from_seed(7)
    p2 = EdgePriority.from_seed(7)
    v = p1.value("c", "a")
    assert v == p2.value("c", "a")
    assert 0 < v < 1
    assert p1.value("c", "a") != EdgePriority.from_seed(8).value("c", "a")


def test_explicit_ordering_prefers_earlier_pairs():
    prio = EdgePriority.from_ordering([("c", "a"), ("c", "b")])
    assert prio.value("c", "a") < prio.value("c", "b")
    # unlisted pairs rank after everything listed
    assert prio.value("c", "b") < prio.value("d", "a")


def test_sample_tree_diamond_distances():
    p = fixtures.load("diamond")
    g = reachable_subgraph(p)
    parts = sybil_clusters(g, compute_gamma(g, p))
    h = cluster_graph(g, parts)
    tree = sample_sp_tree(h, EdgePriority.from_seed(3))
    assert tree.dist == {"s": 0, "a": 1, "b": 1, "c": 2, "d": 2}
    assert tree.parent["a"] == "s" and tree.parent["b"] == "s"
    assert tree.parent["c"] in {"a", "b"} and tree.parent["d"] in {"a", "b"}


def test_sample_tree_rejects_priority_tie():
    g = ReachableGraph.from_arcs("s", {"s": ["a", "b"], "a": ["c"], "b": ["c"]})

    class Flat:
        def value(self, child, parent):
            return Fraction(1, 2)

    parts = sybil_clusters(g, compute_gamma_of(g))
    h = cluster_graph(g, parts)
    with pytest.raises(GraphError, match="tie"):
        sample_sp_tree(h, Flat())


def compute_gamma_of(g):
    p = build_profile(
        "s",
        ["a", "b"],
        {"a": (0, ["c"]), "b": (0, ["c"]), "c": (0, [])},
    )
    return compute_gamma(g, p)


@given(profiles(max_buyers=7, with_gamma0=True), st.integers(0, 2**32))
def test_sampled_tree_preserves_distances(p, seed):
    g = reachable_subgraph(p)
    parts = sybil_clusters(g, compute_gamma(g, p))
    h = cluster_graph(g, parts)
    tree = sample_sp_tree(h, EdgePriority.from_seed(seed))
    for child, parent in tree.parent.items():
        assert tree.dist[child] == tree.dist[parent] + 1
        assert (parent, child) in h.g.arcs()


@given(profiles(max_buyers=7, with_gamma0=True), st.integers(0, 2**32))
def test_pruned_graph_keeps_tree_distances(p, seed):
    g = reachable_subgraph(p)
    parts = sybil_clusters(g, compute_gamma(g, p))
    h = cluster_graph(g, parts)
    tree = sample_sp_tree(h, EdgePriority.from_seed(seed))
    pruned = prune_graph(g, parts, tree)
    assert pruned.vertex_set() == g.vertex_set()
    # intra-cluster arcs are untouched
    for u, v in g.arcs():
        if parts.root_of[u] == parts.root_of[v]:
            assert (u, v) in pruned.arcs()
