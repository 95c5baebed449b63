"""Slow, independent reference implementations used to pin the fast code.

Everything here works on plain adjacency dicts {vertex: set(vertex)} and
uses naive enumeration, so it shares no code with the package under test.
"""

from __future__ import annotations

from itertools import combinations


def bfs_reachable(adjacency, source):
    seen = {source}
    queue = [source]
    while queue:
        u = queue.pop()
        for v in adjacency.get(u, ()):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def dominated_oracle(adjacency, source, x):
    """alpha(x) by deletion: everything that becomes unreachable without x."""
    reachable = bfs_reachable(adjacency, source)
    if x == source:
        return set(reachable)
    cut = {u: {v for v in vs if v != x} for u, vs in adjacency.items() if u != x}
    still = bfs_reachable(cut, source)
    return {v for v in reachable if v not in still} | {x}


def idom_oracle(adjacency, source, x):
    """Immediate dominator: the strict dominator dominated by all others."""
    reachable = bfs_reachable(adjacency, source)
    doms = [
        d for d in reachable if d != x and x in dominated_oracle(adjacency, source, d)
    ]
    # the closest strict dominator is the one dominated by every other one
    for d in doms:
        if all(d in dominated_oracle(adjacency, source, e) for e in doms):
            return d
    raise AssertionError(f"no immediate dominator for {x!r}")


def simple_paths(adjacency, source, target, _prefix=None):
    prefix = _prefix or [source]
    if source == target:
        yield list(prefix)
        return
    for v in sorted(adjacency.get(source, ())):
        if v not in prefix:
            prefix.append(v)
            yield from simple_paths(adjacency, v, target, prefix)
            prefix.pop()


def is_meeting_point(adjacency, members, z):
    """Two internally-disjoint simple paths from two distinct members to z."""
    if z in members:
        return False
    for x, y in combinations(sorted(members), 2):
        if disjoint_path_pair(adjacency, x, y, z):
            return True
    return False


def disjoint_path_pair(adjacency, x, y, z):
    """Simple paths x->z and y->z sharing no vertex but z."""
    for p in simple_paths(adjacency, x, z):
        body_p = set(p) - {z}
        if y in body_p:
            continue
        for q in simple_paths(adjacency, y, z):
            if not body_p & (set(q) - {z}):
                return True
    return False


def gamma_oracle(adjacency, seller, neighbors, gamma0=()):
    reachable = bfs_reachable(adjacency, seller)
    members = {seller} | (set(neighbors) & reachable) | (set(gamma0) & reachable)
    while True:
        fresh = {
            z
            for z in reachable - members
            if is_meeting_point(adjacency, members, z)
        }
        if not fresh:
            return members
        members |= fresh
