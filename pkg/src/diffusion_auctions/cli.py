"""Command-line front end.

Subcommands: run, gamma, attack, experiment, verify. Machine-readable
results (JSON or CSV) go to stdout; commentary goes to stderr. Exit codes:
0 success / expected verdicts, 1 unexpected verdict, 2 usage error,
3 input validation error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import string
import sys
from fractions import Fraction

from . import __version__, fixtures
from .adversary import (
    AttackError,
    AttackProfile,
    MechanismSpec,
    StrategySpace,
    auto_grid,
    check_properties,
    mechanism,
)
from .experiments import (
    ExperimentConfig,
    ExperimentError,
    PriceModelParams,
    run_experiment,
    summarize,
    write_results,
    write_summary,
)
from .graph import GraphError, reachable_subgraph
from .money import format_money, parse_money
from .profile import ProfileError, ReportProfile, build_profile, load_profile
from .sybil import EdgePriority, cluster_graph, compute_gamma, sybil_clusters

RUN_MECHANISMS = ("nsp", "vcg", "idm", "stm", "stm-reserve", "scm", "osm")
VERIFY_DEFAULT = "nsp,vcg,idm,stm,scm"

# properties each mechanism is known to give up; a found witness there is
# the expected verdict, and an exhaustive miss is only "no witness found"
EXPECTED_FAIL = {
    "vcg": {"SP", "NON_DEFICIT"},
    "idm": {"SP"},
    "osm": {"IC", "SP"},
}


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_money(value)
    if isinstance(value, AttackProfile):
        return {
            "attacker": value.attacker,
            "identities": list(value.identities),
            "reports": {
                vid: {
                    "bid": format_money(rep.bid),
                    "diffuse": sorted(rep.diffuse),
                }
                for vid, rep in value.reports.items()
            },
        }
    if isinstance(value, MechanismSpec):
        return value.label()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: _jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted(_jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(doc) -> None:
    json.dump(_jsonable(doc), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffauction",
        description="Sybil-resistant diffusion auctions over report profiles.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one mechanism on a profile")
    run.add_argument("--mechanism", required=True, choices=RUN_MECHANISMS)
    run.add_argument("--input", required=True, help="profile JSON file")
    run.add_argument("--seed", type=int, default=0, help="tree priority seed (scm)")
    run.add_argument("--kappa", default=None, help="reserve price (stm-reserve)")
    run.add_argument("--stm-tie", choices=("strict", "geq"), default="strict")

    gamma = sub.add_parser("gamma", help="print the trusted set and clusters")
    gamma.add_argument("--input", required=True, help="profile JSON file")

    attack = sub.add_parser("attack", help="search an attack space for violations")
    attack.add_argument("--mechanism", required=True, choices=RUN_MECHANISMS)
    attack.add_argument("--input", required=True, help="profile JSON file")
    attack.add_argument("--attacker", required=True, help="buyer id to deviate")
    attack.add_argument("--max-identities", type=int, default=0, metavar="K")
    attack.add_argument(
        "--bid-grid", default="auto", help='"auto" or a comma list of bids'
    )
    attack.add_argument("--diffusion", choices=("all", "full"), default="all")
    attack.add_argument("--seed", type=int, default=None, help="scm priority seed")
    attack.add_argument("--kappa", default=None, help="reserve price (stm-reserve)")
    attack.add_argument("--stm-tie", choices=("strict", "geq"), default="strict")

    exp = sub.add_parser("experiment", help="batch runs on random networks")
    exp.add_argument("--n", type=int, required=True)
    exp.add_argument("--m", type=int, required=True)
    exp.add_argument("--trials", type=int, required=True)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--mechanisms", default="nsp,stm,scm,idm,vcg")
    exp.add_argument("--out", required=True, help='results CSV path, "-" for stdout')
    exp.add_argument("--summary", default=None, help="optional summary CSV path")

    verify = sub.add_parser("verify", help="property matrix over sampled instances")
    verify.add_argument("--mechanisms", default=VERIFY_DEFAULT)
    verify.add_argument("--n-max", type=int, default=4, help="max buyers per instance")
    verify.add_argument("--trials", type=int, default=20, help="random instances")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--k-max", type=int, default=1)
    verify.add_argument("--input", default=None, help="extra profile to include")
    return parser


def _spec_for(args, seed_default=None) -> MechanismSpec:
    kwargs = {"strict_winner": args.stm_tie == "strict"}
    if args.mechanism == "stm-reserve":
        if args.kappa is None:
            raise AttackError("stm-reserve needs --kappa")
        kwargs["kappa"] = parse_money(args.kappa)
    if args.mechanism == "scm":
        seed = getattr(args, "seed", None)
        if seed is None:
            seed = seed_default
        if seed is not None:
            kwargs["priority"] = EdgePriority.from_seed(seed)
    return mechanism(args.mechanism, **kwargs)


def _cmd_run(args) -> int:
    profile = load_profile(args.input)
    out = _spec_for(args, seed_default=args.seed).run(profile)
    _emit(
        {
            "mechanism": args.mechanism,
            "winner": out.winner,
            "payments": dict(out.payments),
            "revenue": out.revenue,
            "social_welfare": out.social_welfare,
            "trace": dict(out.trace),
        }
    )
    return 0


def _cmd_gamma(args) -> int:
    profile = load_profile(args.input)
    g = reachable_subgraph(profile)
    gamma = compute_gamma(g, profile)
    parts = sybil_clusters(g, gamma)
    h = cluster_graph(g, parts)
    _emit(
        {
            "gamma": sorted(gamma.members),
            "clusters": {root: sorted(parts[root]) for root in parts.roots()},
            "cluster_edges": sorted(h.g.arcs()),
        }
    )
    return 0


def _cmd_attack(args) -> int:
    profile = load_profile(args.input)
    if args.attacker not in profile.reports:
        raise AttackError(f"attacker {args.attacker!r} is not a buyer")
    if args.bid_grid == "auto":
        grid = auto_grid(profile)
    else:
        grid = tuple(parse_money(b) for b in args.bid_grid.split(","))
    space = StrategySpace(grid, k_max=args.max_identities, diffusion=args.diffusion)
    spec = _spec_for(args)
    prop = "SP" if args.max_identities > 0 else "IC"
    result = check_properties(spec, profile, (prop,), space, [args.attacker])[prop]
    _emit(
        {
            "mechanism": spec.label(),
            "attacker": args.attacker,
            "property": prop,
            "space": result.space,
            "ok": result.ok,
            "violation": result.violation,
        }
    )
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig(
        PriceModelParams(args.n, args.m, args.seed),
        trials=args.trials,
        mechanisms=tuple(args.mechanisms.split(",")),
    )
    rows = run_experiment(config)
    if args.out == "-":
        write_results(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_results(rows, fh)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    if args.summary is not None:
        with open(args.summary, "w", encoding="utf-8", newline="") as fh:
            write_summary(summarize(rows), fh)
        print(f"wrote summary to {args.summary}", file=sys.stderr)
    return 0


def _random_profile(rng: random.Random, n_max: int) -> ReportProfile:
    n = rng.randint(1, n_max)
    names = list(string.ascii_lowercase[:n])
    neighbors = rng.sample(names, rng.randint(1, n))
    reports = {}
    for vid in names:
        others = [u for u in names if u != vid]
        diffuse = rng.sample(others, rng.randint(0, len(others)))
        reports[vid] = (rng.randint(0, 6), sorted(diffuse))
    return build_profile("s", sorted(neighbors), reports)


def _verify_instances(args):
    for name in ("funnel", "diamond", "bridge", "osm"):
        yield name, fixtures.load(name)
    if args.input is not None:
        yield args.input, load_profile(args.input)
    rng = random.Random(args.seed)
    for i in range(args.trials):
        yield f"random-{i}", _random_profile(rng, args.n_max)


def _cmd_verify(args) -> int:
    if args.n_max > 6:
        raise AttackError("--n-max is capped at 6")
    names = args.mechanisms.split(",")
    for name in names:
        if name not in RUN_MECHANISMS:
            raise AttackError(f"unknown mechanism {name!r}")
    props = ("IR", "IC", "SP", "NON_DEFICIT")
    worst = {(m, p): None for m in names for p in props}
    origin = {}
    instances = list(_verify_instances(args))
    for label, profile in instances:
        space = StrategySpace(auto_grid(profile), k_max=args.k_max)
        for name in names:
            spec = mechanism(name, kappa=Fraction(0)) if name == "stm-reserve" else mechanism(name)
            results = check_properties(spec, profile, props, space)
            for prop, res in results.items():
                if res.violation is None:
                    continue
                prev = worst[(name, prop)]
                if prev is None or res.violation.gain > prev.gain:
                    worst[(name, prop)] = res.violation
                    origin[(name, prop)] = label
    verdicts = []
    ok = True
    for name in names:
        for prop in props:
            violation = worst[(name, prop)]
            expected_fail = prop in EXPECTED_FAIL.get(name, ())
            if violation is None:
                verdict = "pass"
                note = "no witness found" if expected_fail else ""
            else:
                verdict = "violation"
                note = "" if expected_fail else "unexpected"
                if not expected_fail:
                    ok = False
            verdicts.append(
                {
                    "mechanism": name,
                    "property": prop,
                    "expected": "violation" if expected_fail else "pass",
                    "verdict": verdict,
                    "note": note,
                    "instance": origin.get((name, prop)),
                    "witness": violation,
                }
            )
    _emit({"ok": ok, "instances": len(instances), "verdicts": verdicts})
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "gamma": _cmd_gamma,
        "attack": _cmd_attack,
        "experiment": _cmd_experiment,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ProfileError, GraphError, AttackError, ExperimentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
