"""Sybil attacks and brute-force verification of incentive properties.

An attack replaces one buyer's report with a bundle of reports: her own plus
up to ``k`` fake identities, each diffusing only within the bundle and her
true neighbor set.  The checker exhaustively sweeps a finite strategy space
and compares aggregate utilities with exact arithmetic, so a violation
report is a replayable counterexample rather than a statistical claim.

Performance note: the search space factors into diffusion structures
(which fix the post-attack graph) times bid vectors.  All graph-dependent
work (trusted set, dominator tree, ladder engines) is cached per structure
and the inner loop only re-evaluates the ladder on a new bid vector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .graph import ReachableGraph, reachable_subgraph
from .dominators import DominatorTree, dominator_tree
from .mechanisms import (
    LadderEngine,
    NspEngine,
    Outcome,
    VcgEngine,
    run_idm,
    run_nsp,
    run_osm,
    run_scm,
    run_stm,
    run_stm_reserve,
    run_vcg,
)
from .money import Money, ZERO, parse_money
from .profile import Report, ReportProfile, VertexId
from .sybil import (
    EdgePriority,
    GammaSet,
    cluster_graph,
    compute_gamma,
    sybil_clusters,
)


class AttackError(ValueError):
    pass


@dataclass(frozen=True)
class AttackProfile:
    """One buyer's strategic play: her own report plus k fake identities."""

    attacker: VertexId
    identities: tuple[VertexId, ...]  # attacker first, then the fakes
    reports: Mapping[VertexId, Report]

    @property
    def k(self) -> int:
        return len(self.identities) - 1

    def key(self):
        return tuple(
            (vid, self.reports[vid].bid, tuple(sorted(self.reports[vid].diffuse)))
            for vid in self.identities
        )


@dataclass(frozen=True)
class StrategySpace:
    bid_grid: tuple[Money, ...]
    k_max: int = 0
    diffusion: str = "all"  # "all" subsets, or "full" diffusion only

    def __post_init__(self):
        if self.k_max < 0:
            raise AttackError("k_max must be >= 0")
        if self.diffusion not in ("all", "full"):
            raise AttackError(f"unknown diffusion mode {self.diffusion!r}")
        object.__setattr__(
            self, "bid_grid", tuple(sorted(parse_money(b) for b in self.bid_grid))
        )

    def describe(self) -> str:
        grid = ",".join(str(b) for b in self.bid_grid)
        return (
            f"bid grid {{{grid}}}, up to {self.k_max} fake identities, "
            f"{'all diffusion subsets' if self.diffusion == 'all' else 'full diffusion only'}"
        )


def auto_grid(profile: ReportProfile) -> tuple[Money, ...]:
    """Every bid in the profile, each perturbed by one, and zero.

    Mechanism outcomes are piecewise constant between occurring bid values,
    so this grid visits every outcome region reachable at this scale.
    """
    values = {ZERO}
    for rep in profile.reports.values():
        values.add(rep.bid)
        values.add(rep.bid + 1)
        if rep.bid >= 1:
            values.add(rep.bid - 1)
    return tuple(sorted(values))


def sybil_names(truth: ReportProfile, attacker: VertexId, k: int) -> tuple[VertexId, ...]:
    """Canonical fake-identity names; fakes are interchangeable labels."""
    names = tuple(f"{attacker}+{j}" for j in range(1, k + 1))
    for name in names:
        if name in truth.reports or name == truth.seller:
            raise AttackError(f"identity name {name!r} already taken")
    return names


def apply_attack(truth: ReportProfile, attack: AttackProfile) -> ReportProfile:
    """Post-attack report profile; every non-attacker report is unchanged."""
    if attack.attacker not in truth.reports:
        raise AttackError(f"attacker {attack.attacker!r} is not a buyer")
    allowed = set(attack.identities) | set(truth.reports[attack.attacker].diffuse)
    for vid in attack.identities:
        if vid != attack.attacker and (vid in truth.reports or vid == truth.seller):
            raise AttackError(f"fake identity {vid!r} collides with a real agent")
        for target in sorted(attack.reports[vid].diffuse):
            if target not in allowed or target == vid:
                raise AttackError(
                    f"identity {vid!r} may not diffuse to {target!r}: "
                    "targets must lie in the bundle or the attacker's true neighbor set"
                )
    merged = dict(truth.reports)
    merged.update(attack.reports)
    return ReportProfile(truth.seller, truth.seller_neighbors, truth.gamma0, merged)


# --------------------------------------------------------------- mechanisms


@dataclass(frozen=True)
class MechanismSpec:
    """A runnable mechanism identifier: name plus whatever it is configured
    with (reserve price, tree priorities, winner tie rule)."""

    name: str
    kappa: Money | None = None
    priority: EdgePriority | None = None
    strict_winner: bool = True

    def run(self, profile: ReportProfile) -> Outcome:
        if self.name == "nsp":
            return run_nsp(profile)
        if self.name == "vcg":
            return run_vcg(profile)
        if self.name == "idm":
            return run_idm(profile)
        if self.name == "stm":
            return run_stm(profile, self.strict_winner)
        if self.name == "stm-reserve":
            return run_stm_reserve(profile, self.kappa, self.strict_winner)
        if self.name == "scm":
            if self.priority is None:
                raise AttackError("running scm needs a priority (or use check_property)")
            return run_scm(profile, self.priority, self.strict_winner)
        if self.name == "osm":
            return run_osm(profile)
        raise AttackError(f"unknown mechanism {self.name!r}")

    def label(self) -> str:
        if self.name == "stm" and not self.strict_winner:
            return "stm(>=)"
        return self.name


def mechanism(name: str, **kwargs) -> MechanismSpec:
    return MechanismSpec(name, **kwargs)


# ----------------------------------------------------------- utility algebra


def attacker_utility(
    mech: MechanismSpec, truth: ReportProfile, attack: AttackProfile
) -> Money:
    """Aggregate utility over the whole identity bundle, valued at the
    attacker's true value for the item."""
    outcome = mech.run(apply_attack(truth, attack))
    return _bundle_utility(
        outcome.winner, outcome.payments, truth.bid(attack.attacker), attack.identities
    )


def truthful_utility(mech: MechanismSpec, truth: ReportProfile, buyer: VertexId) -> Money:
    outcome = mech.run(truth)
    value = truth.bid(buyer) if outcome.winner == buyer else ZERO
    return value - outcome.payment(buyer)


def _bundle_utility(winner, payments, value, identities) -> Money:
    total = value if winner in identities else ZERO
    for vid in identities:
        total -= payments.get(vid, ZERO)
    return total


# -------------------------------------------------------------- enumeration


def _subsets(pool: Sequence[VertexId]) -> list[frozenset[VertexId]]:
    out = []
    for r in range(len(pool) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(pool, r))
    return out


def _admissible(ids: Sequence[VertexId], dsets: Sequence[frozenset]) -> bool:
    # every fake must be reachable from the attacker via in-bundle arcs,
    # otherwise the attack is a relabeling of one with fewer identities
    if len(ids) == 1:
        return True
    id_set = set(ids)
    seen = {ids[0]}
    queue = [0]
    while queue:
        j = queue.pop()
        for target in dsets[j]:
            if target in id_set and target not in seen:
                seen.add(target)
                queue.append(ids.index(target))
    return len(seen) == len(ids)


def _relabeled(ids, dsets, sigma: Mapping[VertexId, VertexId]):
    """Structure after renaming fakes by ``sigma`` (identity on real ids)."""
    inverse = {new: old for old, new in sigma.items()}
    out = []
    for vid in ids:
        source = ids.index(inverse.get(vid, vid))
        out.append(frozenset(sigma.get(t, t) for t in dsets[source]))
    return tuple(out)


def _dkey(dsets):
    return tuple(tuple(sorted(d)) for d in dsets)


@lru_cache(maxsize=4096)
def _structures(
    attacker: VertexId,
    neighbors: frozenset[VertexId],
    fakes: tuple[VertexId, ...],
    mode: str,
) -> tuple[tuple[tuple[frozenset, ...], tuple[tuple[int, ...], ...]], ...]:
    """Canonical diffusion structures for a fixed identity count.

    Fakes are interchangeable labels, so only the lexicographically least
    structure of each relabeling class is kept.  Each entry carries the
    index permutations (over the identity slots) that fix the structure;
    bid vectors are canonicalized against exactly those.
    """
    ids = (attacker, *fakes)
    pools = [tuple(sorted((set(ids) | neighbors) - {vid})) for vid in ids]
    if mode == "full":
        choices = [[frozenset(pool)] for pool in pools]
    else:
        choices = [_subsets(pool) for pool in pools]
    sigmas = [
        dict(zip(fakes, perm))
        for perm in itertools.permutations(fakes)
        if perm != fakes
    ]
    out = []
    for dsets in itertools.product(*choices):
        if not _admissible(ids, dsets):
            continue
        key = _dkey(dsets)
        stabilizer = []
        canonical = True
        for sigma in sigmas:
            mapped = _dkey(_relabeled(ids, dsets, sigma))
            if mapped < key:
                canonical = False
                break
            if mapped == key:
                # slot j's bid moves to the slot of sigma(ids[j])
                stabilizer.append(
                    tuple(ids.index(sigma.get(vid, vid)) for vid in ids)
                )
        if canonical:
            out.append((dsets, tuple(stabilizer)))
    return tuple(out)


def enumerate_attacks(
    truth: ReportProfile, attacker: VertexId, space: StrategySpace
) -> Iterator[AttackProfile]:
    """All attacks in the space, one representative per fake-relabeling class."""
    if attacker not in truth.reports:
        raise AttackError(f"attacker {attacker!r} is not a buyer")
    neighbors = truth.reports[attacker].diffuse
    for k in range(space.k_max + 1):
        fakes = sybil_names(truth, attacker, k)
        ids = (attacker, *fakes)
        for dsets, stabilizer in _structures(attacker, neighbors, fakes, space.diffusion):
            for bids in itertools.product(space.bid_grid, repeat=k + 1):
                if any(
                    tuple(bids[perm[j]] for j in range(k + 1)) < bids
                    for perm in stabilizer
                ):
                    continue
                yield AttackProfile(
                    attacker,
                    ids,
                    {
                        vid: Report(bid, dset)
                        for vid, bid, dset in zip(ids, bids, dsets)
                    },
                )


# ------------------------------------------------------------ cached engines


@lru_cache(maxsize=65536)
def _attacked_graph(
    g_truth: ReachableGraph,
    attacker: VertexId,
    ids: tuple[VertexId, ...],
    dsets: tuple[frozenset, ...],
) -> ReachableGraph:
    adjacency = {u: list(g_truth.names(g_truth.succ[g_truth.index[u]])) for u in g_truth.vertices}
    for vid, dset in zip(ids, dsets):
        adjacency[vid] = list(dset)
    return ReachableGraph.from_arcs(g_truth.seller, adjacency)


class _Analysis:
    """Per-graph lazy bundle: trusted set, dominator tree, engines."""

    def __init__(self, g: ReachableGraph, neighbors: frozenset, gamma0: frozenset):
        self.g = g
        self.neighbors = neighbors
        self.gamma0 = gamma0
        self._gamma = None
        self._dom = None
        self._engines: dict = {}
        self._scm = None

    @property
    def gamma(self) -> GammaSet:
        if self._gamma is None:
            shim = _GammaShim(self.neighbors, self.gamma0)
            self._gamma = compute_gamma(self.g, shim)
        return self._gamma

    @property
    def dom(self) -> DominatorTree:
        if self._dom is None:
            self._dom = dominator_tree(self.g)
        return self._dom

    def engine(self, kind: str, strict: bool = True):
        key = (kind, strict)
        if key not in self._engines:
            if kind == "stm":
                eng = LadderEngine(self.g, "tax", self.gamma, self.dom, strict)
            elif kind == "idm":
                eng = LadderEngine(self.g, "resale", dom=self.dom)
            elif kind == "vcg":
                eng = VcgEngine(self.g, self.dom)
            elif kind == "nsp":
                eng = NspEngine(self.g, self.g.mask_of(self.neighbors & self.g.vertex_set()))
            else:
                raise AttackError(kind)
            self._engines[key] = eng
        return self._engines[key]

    def scm_trees(self) -> "_ScmTrees":
        if self._scm is None:
            self._scm = _ScmTrees(self)
        return self._scm


class _GammaShim:
    """compute_gamma only reads these two profile fields."""

    def __init__(self, neighbors, gamma0):
        self.seller_neighbors = neighbors
        self.gamma0 = gamma0


class _ScmTrees:
    """Every shortest-path tree of the cluster graph, with the candidate
    parent sets that a priority ordering chooses from."""

    def __init__(self, analysis: _Analysis):
        g = analysis.g
        self.analysis = analysis
        parts = sybil_clusters(g, analysis.gamma)
        self.parts = parts
        h = cluster_graph(g, parts)
        dist = {h.g.seller: 0}
        frontier = [h.g.seller]
        while frontier:
            nxt = []
            for u in frontier:
                for vi in _bits(h.g.succ[h.g.index[u]]):
                    v = h.g.vertices[vi]
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        self.candidates: dict[VertexId, tuple[VertexId, ...]] = {}
        for x in h.g.vertices:
            if x == h.g.seller:
                continue
            self.candidates[x] = tuple(
                sorted(
                    h.g.vertices[yi]
                    for yi in _bits(h.g.pred[h.g.index[x]])
                    if dist[h.g.vertices[yi]] + 1 == dist[x]
                )
            )
        children = sorted(self.candidates)
        self.trees = [
            dict(zip(children, pick))
            for pick in itertools.product(*(self.candidates[c] for c in children))
        ]
        self._engines: dict = {}

    def engine(self, tree: Mapping[VertexId, VertexId], strict: bool):
        key = (tuple(sorted(tree.items())), strict)
        if key not in self._engines:
            g = self.analysis.g
            parts = self.parts
            removed = [
                (u, v)
                for u, v in g.arcs()
                if parts.root_of[u] != parts.root_of[v]
                and tree.get(parts.root_of[v]) != parts.root_of[u]
            ]
            if removed:
                pruned = g.without_arcs(removed)
                dom = dominator_tree(pruned)
            else:
                pruned, dom = g, self.analysis.dom
            self._engines[key] = LadderEngine(
                pruned, "tax", self.analysis.gamma, dom, strict
            )
        return self._engines[key]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@lru_cache(maxsize=16384)
def _analysis(g: ReachableGraph, neighbors: frozenset, gamma0: frozenset) -> _Analysis:
    return _Analysis(g, neighbors, gamma0)


def clear_caches() -> None:
    _analysis.cache_clear()
    _attacked_graph.cache_clear()
    _structures.cache_clear()


# ------------------------------------------------------------- the checker


PROPERTIES = ("IR", "IC", "SP", "NON_DEFICIT")


@dataclass(frozen=True)
class ViolationReport:
    property: str
    mechanism: str
    attacker: VertexId | None
    attack: AttackProfile | None
    truthful_utility: Money
    deviating_utility: Money
    gain: Money
    space: str
    detail: str = ""
    # concrete configuration that realizes the gain (matters for the cluster
    # mechanism, where the verdict is per tree-choice rule)
    replay: MechanismSpec | None = None


def replay_gain(truth: ReportProfile, report: ViolationReport) -> Money:
    """Re-run the reported attack and return the reproduced gain."""
    mech = report.replay
    base = truthful_utility(mech, truth, report.attacker)
    return attacker_utility(mech, truth, report.attack) - base


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    property: str
    mechanism: str
    space: str
    violation: ViolationReport | None = None
    note: str = ""


def check_property(
    mech: MechanismSpec,
    truth: ReportProfile,
    prop: str,
    space: StrategySpace,
    attackers: Iterable[VertexId] | None = None,
) -> CheckResult:
    results = check_properties(mech, truth, (prop,), space, attackers)
    return results[prop]


def check_properties(
    mech: MechanismSpec,
    truth: ReportProfile,
    props: Sequence[str],
    space: StrategySpace,
    attackers: Iterable[VertexId] | None = None,
) -> dict[str, CheckResult]:
    """Evaluate several properties over one sweep of the strategy space."""
    for prop in props:
        if prop not in PROPERTIES:
            raise AttackError(f"unknown property {prop!r}")
    desc = space.describe()
    label = mech.label()
    attackers = tuple(attackers) if attackers is not None else truth.buyers
    out: dict[str, CheckResult] = {}

    if "IR" in props:
        out["IR"] = _check_ir(mech, truth, desc)

    sweeps = [p for p in props if p in ("IC", "SP", "NON_DEFICIT")]
    if not sweeps:
        return out
    need_ic = "IC" in props
    need_sp = "SP" in props
    need_nd = "NON_DEFICIT" in props

    if mech.name == "scm" and mech.priority is None:
        sweep = _sweep_scm(mech, truth, space, attackers, need_ic, need_sp, need_nd, desc)
    elif mech.name in ("stm", "idm", "vcg", "nsp"):
        sweep = _sweep_engine(mech, truth, space, attackers, need_ic, need_sp, need_nd, desc)
    else:
        sweep = _sweep_naive(mech, truth, space, attackers, need_ic, need_sp, need_nd, desc)

    for prop in sweeps:
        violation = sweep.get(prop)
        out[prop] = CheckResult(violation is None, prop, label, desc, violation)
    return out


def _check_ir(mech: MechanismSpec, truth: ReportProfile, desc: str) -> CheckResult:
    outcome = mech.run(truth) if not (mech.name == "scm" and mech.priority is None) else None
    outcomes = (
        [outcome]
        if outcome is not None
        else _scm_truth_outcomes(truth, mech.strict_winner)[1]
    )
    for oc in outcomes:
        for vid, pay in oc.payments.items():
            value = truth.bid(vid) if vid == oc.winner else ZERO
            if value - pay < 0:
                violation = ViolationReport(
                    "IR", mech.label(), vid, None, ZERO, value - pay, pay - value, desc,
                    detail="negative utility under truthful reporting",
                )
                return CheckResult(False, "IR", mech.label(), desc, violation)
    return CheckResult(True, "IR", mech.label(), desc)


def _scm_truth_outcomes(truth: ReportProfile, strict: bool):
    g = reachable_subgraph(truth)
    analysis = _analysis(g, truth.seller_neighbors, truth.gamma0)
    trees = analysis.scm_trees()
    outcomes = []
    for tree in trees.trees:
        prio = EdgePriority.from_ordering(list(tree.items()))
        outcomes.append(run_scm(truth, prio, strict))
    return trees, outcomes


# ------------------------------------------------------- sweep implementations


def _numeric(m: Money):
    # plain ints compare an order of magnitude faster than Fractions
    return int(m) if m.denominator == 1 else m


def _better(found: dict, prop: str, report: ViolationReport) -> None:
    """Keep the max-gain witness; ties break to the smallest attack."""
    current = found.get(prop)
    if (
        current is None
        or report.gain > current.gain
        or (
            report.gain == current.gain
            and current.attack is not None
            and report.attack is not None
            and report.attack.key() < current.attack.key()
        )
    ):
        found[prop] = report


def _sweep_naive(mech, truth, space, attackers, need_ic, need_sp, need_nd, desc):
    found: dict[str, ViolationReport] = {}
    if need_nd:
        revenue = mech.run(truth).revenue
        if revenue < 0:
            found["NON_DEFICIT"] = ViolationReport(
                "NON_DEFICIT", mech.label(), None, None, ZERO, revenue, -revenue, desc,
                detail="negative revenue under truthful reporting", replay=mech,
            )
    for attacker in attackers:
        base = truthful_utility(mech, truth, attacker)
        for attack in enumerate_attacks(truth, attacker, space):
            if attack.k > 0 and not (need_sp or need_nd):
                continue
            outcome = mech.run(apply_attack(truth, attack))
            util = _bundle_utility(
                outcome.winner, outcome.payments, truth.bid(attacker), attack.identities
            )
            gain = util - base
            if gain > 0:
                report = ViolationReport(
                    "SP", mech.label(), attacker, attack, base, util, gain, desc,
                    replay=mech,
                )
                if attack.k == 0 and need_ic:
                    _better(found, "IC", replace(report, property="IC"))
                if need_sp:
                    _better(found, "SP", report)
            if need_nd and outcome.revenue < 0:
                _better(
                    found,
                    "NON_DEFICIT",
                    ViolationReport(
                        "NON_DEFICIT", mech.label(), attacker, attack, ZERO,
                        outcome.revenue, -outcome.revenue, desc, replay=mech,
                    ),
                )
    return found


def _sweep_engine(mech, truth, space, attackers, need_ic, need_sp, need_nd, desc):
    """Structure-major sweep with cached graphs and engines."""
    g_truth = reachable_subgraph(truth)
    found: dict[str, ViolationReport] = {}
    kind = mech.name
    strict = mech.strict_winner

    truth_outcome = mech.run(truth)
    if need_nd and truth_outcome.revenue < 0:
        found["NON_DEFICIT"] = ViolationReport(
            "NON_DEFICIT", mech.label(), None, None, ZERO, truth_outcome.revenue,
            -truth_outcome.revenue, desc, detail="negative revenue under truth",
        )

    grid = [_numeric(b) for b in space.bid_grid]
    for attacker in attackers:
        if attacker not in g_truth.index:
            continue  # unreachable buyers never trade; nothing to gain
        value = _numeric(truth.bid(attacker))
        base = _numeric(
            (truth.bid(attacker) if truth_outcome.winner == attacker else ZERO)
            - truth_outcome.payment(attacker)
        )
        neighbors = truth.reports[attacker].diffuse
        for k in range(space.k_max + 1):
            if k > 0 and not (need_sp or need_nd):
                break
            fakes = sybil_names(truth, attacker, k)
            ids = (attacker, *fakes)
            for dsets, _sym in _structures(attacker, neighbors, fakes, space.diffusion):
                g = _attacked_graph(g_truth, attacker, ids, dsets)
                analysis = _analysis(g, truth.seller_neighbors, truth.gamma0)
                engine = analysis.engine(kind, strict)
                bids = [ZERO] * g.n
                for i, vid in enumerate(g.vertices):
                    if vid != truth.seller and vid in truth.reports:
                        bids[i] = _numeric(truth.bid(vid))
                phi_set = {g.index[v] for v in ids if v in g.index}
                slots = [(j, g.index[ids[j]]) for j in range(k + 1) if ids[j] in g.index]
                settle = engine.settle
                for combo in itertools.product(grid, repeat=k + 1):
                    for j, idx in slots:
                        bids[idx] = combo[j]
                    widx, pays = settle(bids)
                    if need_nd:
                        revenue = sum(amount for _i, amount in pays)
                        if revenue < 0:
                            _better(
                                found,
                                "NON_DEFICIT",
                                _replayed_nd(mech, truth, attacker, ids, dsets, combo, desc),
                            )
                    if not (need_sp or (need_ic and k == 0)):
                        continue
                    util = value if widx in phi_set else 0
                    for i, amount in pays:
                        if i in phi_set:
                            util -= amount
                    if util > base:
                        attack = _materialize(attacker, ids, dsets, combo)
                        report = ViolationReport(
                            "SP", mech.label(), attacker, attack,
                            Fraction(base), Fraction(util), Fraction(util - base), desc,
                            replay=mech,
                        )
                        if k == 0 and need_ic:
                            _better(found, "IC", replace(report, property="IC"))
                        if need_sp:
                            _better(found, "SP", report)
    return found


def _materialize(attacker, ids, dsets, combo) -> AttackProfile:
    return AttackProfile(
        attacker,
        ids,
        {
            vid: Report(Fraction(bid), dset)
            for vid, bid, dset in zip(ids, combo, dsets)
        },
    )


def _replayed_nd(mech, truth, attacker, ids, dsets, combo, desc) -> ViolationReport:
    attack = _materialize(attacker, ids, dsets, combo)
    revenue = mech.run(apply_attack(truth, attack)).revenue
    return ViolationReport(
        "NON_DEFICIT", mech.label(), attacker, attack, ZERO, revenue, -revenue, desc
    )


def _compatible(truth_trees, t, att_trees, tau) -> bool:
    """Is there one priority ordering that picks tree t on the truthful
    cluster graph and tree tau on the attacked one?

    Per child the constraint is local: an order with top(S_truth) = p_t and
    top(S_attack) = p_tau exists unless each choice appears in the other's
    candidate set, forcing contradictory rankings.
    """
    for child, p_tau in tau.items():
        p_t = t.get(child)
        if p_t is None or p_t == p_tau:
            continue
        if p_tau in truth_trees.candidates.get(child, ()) and p_t in att_trees.candidates[child]:
            return False
    return True


def _realizing_priority(truth_trees, t, att_trees, tau) -> EdgePriority:
    """An explicit ordering that picks tree t truthfully and tau post-attack."""
    pairs = []
    for child in sorted(set(t) | set(tau)):
        p_t, p_tau = t.get(child), tau.get(child)
        if p_t is None:
            pairs.append((child, p_tau))
        elif p_tau is None or p_tau == p_t:
            pairs.append((child, p_t))
        elif p_tau in truth_trees.candidates.get(child, ()):
            # compatibility guarantees p_t is then absent post-attack
            pairs.append((child, p_t))
            pairs.append((child, p_tau))
        else:
            pairs.append((child, p_tau))
            pairs.append((child, p_t))
    return EdgePriority.from_ordering(pairs)


def _sweep_scm(mech, truth, space, attackers, need_ic, need_sp, need_nd, desc):
    """Quantifies over every derandomized tree-choice rule.

    Orderings that pick the same trees are outcome-equivalent, so the sweep
    iterates (truthful tree, attacked tree) pairs realizable by a single
    ordering instead of the orderings themselves.
    """
    g_truth = reachable_subgraph(truth)
    truth_analysis = _analysis(g_truth, truth.seller_neighbors, truth.gamma0)
    truth_trees = truth_analysis.scm_trees()
    strict = mech.strict_winner
    found: dict[str, ViolationReport] = {}

    truth_bids = [ZERO] * g_truth.n
    for i, vid in enumerate(g_truth.vertices):
        if vid != truth.seller:
            truth_bids[i] = _numeric(truth.bid(vid))

    bases = {}
    for ti, tree in enumerate(truth_trees.trees):
        engine = truth_trees.engine(tree, strict)
        widx, pays, _ = engine.outcome_raw(truth_bids)
        if need_nd:
            revenue = sum(a for _i, a in pays)
            if revenue < 0 and "NON_DEFICIT" not in found:
                found["NON_DEFICIT"] = ViolationReport(
                    "NON_DEFICIT", "scm", None, None, ZERO, Fraction(revenue),
                    Fraction(-revenue), desc,
                    detail=f"truthful run under tree {tree}",
                )
        for attacker in attackers:
            if attacker not in g_truth.index:
                continue
            ai = g_truth.index[attacker]
            util = truth_bids[ai] if widx == ai else 0
            for i, amount in pays:
                if i == ai:
                    util -= amount
            bases[(ti, attacker)] = util

    grid = [_numeric(b) for b in space.bid_grid]
    for attacker in attackers:
        if attacker not in g_truth.index:
            continue
        value = _numeric(truth.bid(attacker))
        neighbors = truth.reports[attacker].diffuse
        for k in range(space.k_max + 1):
            if k > 0 and not (need_sp or need_nd):
                break
            fakes = sybil_names(truth, attacker, k)
            ids = (attacker, *fakes)
            for dsets, _sym in _structures(attacker, neighbors, fakes, space.diffusion):
                g = _attacked_graph(g_truth, attacker, ids, dsets)
                analysis = _analysis(g, truth.seller_neighbors, truth.gamma0)
                att_trees = analysis.scm_trees()
                bids = [ZERO] * g.n
                for i, vid in enumerate(g.vertices):
                    if vid != truth.seller and vid in truth.reports:
                        bids[i] = _numeric(truth.bid(vid))
                phi_set = {g.index[v] for v in ids if v in g.index}
                compat = [
                    [
                        ti
                        for ti in range(len(truth_trees.trees))
                        if _compatible(truth_trees, truth_trees.trees[ti], att_trees, tau)
                    ]
                    for tau in att_trees.trees
                ]
                engines = [att_trees.engine(tau, strict) for tau in att_trees.trees]
                for combo in itertools.product(grid, repeat=k + 1):
                    for j, vid in enumerate(ids):
                        if vid in g.index:
                            bids[g.index[vid]] = combo[j]
                    for tree_i, engine in enumerate(engines):
                        matches = compat[tree_i]
                        if not matches and not need_nd:
                            continue
                        widx, pays = engine.settle(bids)
                        if need_nd:
                            revenue = sum(a for _i, a in pays)
                            if revenue < 0:
                                attack = _materialize(attacker, ids, dsets, combo)
                                _better(
                                    found,
                                    "NON_DEFICIT",
                                    ViolationReport(
                                        "NON_DEFICIT", "scm", attacker, attack, ZERO,
                                        Fraction(revenue), Fraction(-revenue), desc,
                                        detail=f"tree {att_trees.trees[tree_i]}",
                                    ),
                                )
                        if not (need_sp or (need_ic and k == 0)) or not matches:
                            continue
                        util = value if widx in phi_set else 0
                        for i, amount in pays:
                            if i in phi_set:
                                util -= amount
                        for ti in matches:
                            base = bases[(ti, attacker)]
                            if util > base:
                                attack = _materialize(attacker, ids, dsets, combo)
                                t = truth_trees.trees[ti]
                                tau = att_trees.trees[tree_i]
                                replay = MechanismSpec(
                                    "scm",
                                    priority=_realizing_priority(
                                        truth_trees, t, att_trees, tau
                                    ),
                                    strict_winner=strict,
                                )
                                report = ViolationReport(
                                    "SP", "scm", attacker, attack, Fraction(base),
                                    Fraction(util), Fraction(util - base), desc,
                                    detail=f"truthful tree {t}, attacked tree {tau}",
                                    replay=replay,
                                )
                                if k == 0 and need_ic:
                                    _better(found, "IC", replace(report, property="IC"))
                                if need_sp:
                                    _better(found, "SP", report)
    return found
