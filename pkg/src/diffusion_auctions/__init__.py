"""Sybil-resistant diffusion auctions on directed social networks."""

from .money import Money, format_money, parse_money
from .profile import (
    ProfileError,
    Report,
    ReportProfile,
    build_profile,
    dump_profile,
    load_profile,
)
from .graph import (
    GraphError,
    ReachableGraph,
    max_bid,
    reachable_subgraph,
    two_disjoint_paths,
)
from .dominators import (
    DominatorTree,
    dominated_set,
    dominator_sequence,
    dominator_tree,
)
from .sybil import (
    ClusterGraph,
    EdgePriority,
    GammaSet,
    ShortestPathTree,
    SybilClusterPartition,
    cluster_graph,
    compute_gamma,
    prune_graph,
    sample_sp_tree,
    sybil_clusters,
)
from .mechanisms import (
    Outcome,
    run_idm,
    run_nsp,
    run_osm,
    run_scm,
    run_stm,
    run_stm_on,
    run_stm_reserve,
    run_vcg,
)
from .adversary import (
    AttackError,
    AttackProfile,
    CheckResult,
    MechanismSpec,
    StrategySpace,
    ViolationReport,
    apply_attack,
    attacker_utility,
    auto_grid,
    check_properties,
    check_property,
    enumerate_attacks,
    mechanism,
    replay_gain,
    sybil_names,
    truthful_utility,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
