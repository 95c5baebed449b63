"""Acceptance gate: one test per headline criterion, each a single
pass/fail line under ``pytest -v``. These intentionally re-derive results
through independent oracles where the unit suites froze expected values."""

import time
from fractions import Fraction
from itertools import product

import pytest

from diffusion_auctions import (
    EdgePriority,
    StrategySpace,
    check_properties,
    check_property,
    cluster_graph,
    compute_gamma,
    dominator_tree,
    mechanism,
    reachable_subgraph,
    run_idm,
    run_nsp,
    run_scm,
    run_stm,
    run_stm_reserve,
    run_vcg,
    sample_sp_tree,
    sybil_clusters,
)
from diffusion_auctions import fixtures
from diffusion_auctions.experiments import (
    ExperimentConfig,
    PriceModelParams,
    generate_price_graph,
    sample_values,
    run_experiment,
)

from corpus import rooted_wirings, wiring_adjacency, wiring_profile
from oracles import (
    disjoint_path_pair,
    dominated_oracle,
    gamma_oracle,
    idom_oracle,
)

GRID = (Fraction(1), Fraction(2), Fraction(3))
ALL_PROPS = ("IR", "IC", "SP", "NON_DEFICIT")


def test_acceptance_golden_funnel():
    start = time.monotonic()
    p = fixtures.load("funnel")
    scm = run_scm(p, EdgePriority.from_seed(1))
    idm = run_idm(p)
    vcg = run_vcg(p)
    nsp = run_nsp(p)
    stm = run_stm(p)
    assert (scm.revenue, idm.revenue, vcg.revenue, nsp.revenue, stm.revenue) == (
        10,
        5,
        0,
        5,
        10,
    )
    for out in (scm, idm, vcg, stm):
        assert out.winner == "d"
    assert time.monotonic() - start < 1.0


def test_acceptance_golden_diamond():
    p = fixtures.load("diamond")
    scm = run_scm(p, EdgePriority.from_ordering([("c", "a"), ("d", "a")]))
    assert scm.winner == "d"
    assert scm.payment("d") == 10
    assert scm.payment("a") == -5  # broker reward
    assert scm.revenue == 5
    assert run_idm(p).revenue == 10
    assert run_vcg(p).revenue == 10
    revenues = [
        run_scm(p, EdgePriority.from_ordering([("c", pc), ("d", pd)])).revenue
        for pc in ("a", "b")
        for pd in ("a", "b")
    ]
    assert sum(revenues) / 4 == Fraction(15, 2)


def test_acceptance_sybil_attack_search():
    start = time.monotonic()
    from diffusion_auctions.adversary import auto_grid

    truth = fixtures.load("bridge")
    space1 = StrategySpace(auto_grid(truth), k_max=1)
    vcg = check_property(mechanism("vcg"), truth, "SP", space1)
    assert not vcg.ok and vcg.violation.gain >= 60
    idm = check_property(mechanism("idm"), truth, "SP", space1)
    assert not idm.ok and idm.violation.gain >= 39
    space2 = StrategySpace(auto_grid(truth), k_max=2)
    assert check_property(mechanism("stm"), truth, "SP", space2).ok
    assert check_property(mechanism("scm"), truth, "SP", space2).ok
    assert time.monotonic() - start < 30.0


def test_acceptance_nonwinner_payments_vanish():
    # 500 random preferential-attachment instances, n <= 50, empty gamma0
    count = 0
    for i in range(500):
        n = 3 + i % 48
        skeleton = generate_price_graph(PriceModelParams(n, 2, 10_000 + i))
        profile = sample_values(skeleton, 20_000 + i)
        assert profile.gamma0 == frozenset()
        out = run_stm(profile)
        for vid, pay in out.payments.items():
            if vid != out.winner:
                assert pay == 0, (i, vid)
        count += 1
    assert count == 500


@pytest.fixture(scope="module")
def large_scale_runs():
    start = time.monotonic()
    runs = {}
    for m in (3, 5):
        cfg = ExperimentConfig(PriceModelParams(100, m, 424200 + m), trials=1000)
        runs[m] = run_experiment(cfg)
    return runs, time.monotonic() - start


def test_acceptance_inequality_chains_at_scale(large_scale_runs):
    runs, elapsed = large_scale_runs
    for m, rows in runs.items():
        by_trial = {}
        for r in rows:
            by_trial.setdefault(r.trial, {})[r.mechanism] = r
        assert len(by_trial) == 1000
        for t, d in by_trial.items():
            assert d["stm"].revenue >= d["scm"].revenue >= d["nsp"].revenue, (m, t)
            assert (
                d["stm"].social_welfare
                >= d["scm"].social_welfare
                >= d["nsp"].social_welfare
            ), (m, t)
            assert d["stm"].revenue >= d["idm"].revenue >= d["vcg"].revenue, (m, t)
            assert (
                d["scm"].social_welfare
                <= d["stm"].social_welfare
                <= d["idm"].social_welfare
                <= d["vcg"].social_welfare
            ), (m, t)
    assert elapsed < 300.0


def test_acceptance_mean_revenue_orderings(large_scale_runs):
    # Known failure: with m >= 2 every mirrored-attachment graph is
    # biconnected from the seller, so the top bidder has no critical
    # brokers and STM, IDM and VCG coincide exactly on every instance.
    # The strict orderings below need broker spreads to exist; they do
    # at m=1 (tree networks) but not at the required scales.
    runs, _ = large_scale_runs
    for m, rows in runs.items():
        totals: dict = {}
        for r in rows:
            totals[r.mechanism] = totals.get(r.mechanism, Fraction(0)) + r.revenue
        mean = {name: total / 1000 for name, total in totals.items()}
        assert mean["stm"] > max(v for k, v in mean.items() if k != "stm"), m
        assert mean["idm"] > mean["scm"] > mean["vcg"], m
        assert mean["stm"] > mean["nsp"] and mean["scm"] > mean["nsp"], m


def test_acceptance_structural_suite():
    for neighbors, diffuse in rooted_wirings(4):
        profile = wiring_profile(neighbors, diffuse)
        adj = wiring_adjacency(neighbors, diffuse)
        g = reachable_subgraph(profile)
        dom = dominator_tree(g)
        gamma = compute_gamma(g, profile)

        # trusted set vs the pairwise fixed-point oracle
        assert gamma.members == gamma_oracle(adj, "s", neighbors)

        # dominator sets vs the deletion oracle, idoms vs path intersection
        for x in g.vertices[1:]:
            assert dom.dominated(x) == dominated_oracle(adj, "s", x)
            assert dom.idom(x) == idom_oracle(adj, "s", x)

        # empty gamma0 collapses the trusted set to the seller's idom children
        assert gamma.members == {"s"} | {
            x for x in g.vertices[1:] if dom.idom(x) == "s"
        }

        # meeting-point machinery vs literal path-pair enumeration
        members = sorted(gamma.members)
        from diffusion_auctions import two_disjoint_paths

        for z in g.vertices:
            if z in gamma.members:
                continue
            for i, x in enumerate(members):
                for y in members[i + 1 :]:
                    assert two_disjoint_paths(g, x, y, z) == bool(
                        disjoint_path_pair(adj, x, y, z)
                    ), (neighbors, diffuse, x, y, z)

        # cluster partition and inter-cluster arcs landing on roots
        parts = sybil_clusters(g, gamma)
        seen = set()
        for root in parts.roots():
            cluster = parts[root]
            assert root in cluster
            assert not (seen & cluster), "clusters overlap"
            seen |= cluster
        assert seen == set(g.vertices)
        cluster_graph(g, parts)  # raises if any arc misses a root


def test_acceptance_sp_ic_brute_force():
    start = time.monotonic()
    space = StrategySpace(GRID, k_max=2)
    vcg_witness = idm_witness = False
    for neighbors, diffuse in rooted_wirings(3):
        buyers = sorted(diffuse)
        for bids in product(GRID, repeat=len(buyers)):
            profile = wiring_profile(neighbors, diffuse, dict(zip(buyers, bids)))
            for name in ("stm", "scm"):
                results = check_properties(mechanism(name), profile, ALL_PROPS, space)
                bad = [p for p, r in results.items() if not r.ok]
                assert not bad, (name, neighbors, diffuse, bids, bad)
            if not vcg_witness:
                vcg_witness = not check_property(
                    mechanism("vcg"), profile, "SP", space
                ).ok
            if not idm_witness:
                idm_witness = not check_property(
                    mechanism("idm"), profile, "SP", space
                ).ok
    assert vcg_witness and idm_witness

    from diffusion_auctions.adversary import auto_grid

    osm_truth = fixtures.load("osm")
    osm = check_property(
        mechanism("osm"), osm_truth, "IC", StrategySpace(auto_grid(osm_truth))
    )
    assert not osm.ok and osm.violation.gain == 5
    assert time.monotonic() - start < 600.0


def test_acceptance_scm_tree_sampling():
    # distance preservation on every sampled tree, across the small corpus
    for neighbors, diffuse in rooted_wirings(3):
        profile = wiring_profile(neighbors, diffuse)
        g = reachable_subgraph(profile)
        gamma = compute_gamma(g, profile)
        parts = sybil_clusters(g, gamma)
        h = cluster_graph(g, parts)
        depth = {h.g.seller: 0}
        frontier = [h.g.seller]
        while frontier:
            nxt = []
            for u in frontier:
                for v in h.g.names(h.g.succ[h.g.index[u]]):
                    if v not in depth:
                        depth[v] = depth[u] + 1
                        nxt.append(v)
            frontier = nxt
        for seed in range(3):
            tree = sample_sp_tree(h, EdgePriority.from_seed(seed))
            for child, parent in tree.parent.items():
                assert depth[child] == depth[parent] + 1

    # uniformity over diamond's four equiprobable trees
    p = fixtures.load("diamond")
    g = reachable_subgraph(p)
    gamma = compute_gamma(g, p)
    h = cluster_graph(g, sybil_clusters(g, gamma))
    counts = {}
    for seed in range(10_000):
        tree = sample_sp_tree(h, EdgePriority.from_seed(seed))
        key = (tree.parent["c"], tree.parent["d"])
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 4
    for key, count in counts.items():
        assert 2350 <= count <= 2650, (key, count)


def test_acceptance_reserve_prices():
    p = fixtures.load("funnel")
    low = run_stm_reserve(p, Fraction(0))
    mid = run_stm_reserve(p, Fraction(12))
    high = run_stm_reserve(p, Fraction(20))
    assert (low.revenue, mid.revenue, high.revenue) == (10, 12, 0)
    assert high.winner is None and high.trace["reserved"] is True
