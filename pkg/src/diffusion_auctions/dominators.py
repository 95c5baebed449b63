"""Dominator trees over seller-reachable graphs.

Uses the iterative data-flow construction (Cooper/Harvey/Kennedy) on a
reverse post-order; any correct algorithm would do, correctness is pinned
by the vertex-deletion oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import GraphError, ReachableGraph, _iter_bits
from .profile import VertexId


@dataclass(eq=False)
class DominatorTree:
    g: ReachableGraph
    _idom: list[int] = field(init=False)
    _children: list[int] = field(init=False)
    _alpha: list[int] = field(init=False)

    def __post_init__(self) -> None:
        g = self.g
        n = g.n
        # reverse post-order from the seller (index 0)
        order: list[int] = []
        seen = 1
        stack: list[tuple[int, int]] = [(0, g.succ[0])]
        while stack:
            node, remaining = stack.pop()
            advanced = False
            while remaining:
                low = remaining & -remaining
                child = low.bit_length() - 1
                remaining ^= low
                if not (seen >> child) & 1:
                    seen |= 1 << child
                    stack.append((node, remaining))
                    stack.append((child, g.succ[child]))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
        rpo = order[::-1]
        rank = [0] * n
        for pos, node in enumerate(rpo):
            rank[node] = pos

        idom = [-1] * n
        idom[0] = 0
        changed = True
        while changed:
            changed = False
            for node in rpo:
                if node == 0:
                    continue
                new_idom = -1
                for p in _iter_bits(g.pred[node]):
                    if idom[p] < 0:
                        continue
                    if new_idom < 0:
                        new_idom = p
                    else:
                        a, b = p, new_idom
                        while a != b:
                            while rank[a] > rank[b]:
                                a = idom[a]
                            while rank[b] > rank[a]:
                                b = idom[b]
                        new_idom = a
                if new_idom >= 0 and idom[node] != new_idom:
                    idom[node] = new_idom
                    changed = True
        self._idom = idom

        self._children = [0] * n
        for node in range(1, n):
            self._children[idom[node]] |= 1 << node
        alpha = [1 << node for node in range(n)]
        for node in reversed(rpo):
            if node != 0:
                alpha[idom[node]] |= alpha[node]
        self._alpha = alpha

    # -- index-level accessors (used by the mechanism engines) --

    def idom_index(self, i: int) -> int:
        return self._idom[i]

    def alpha_mask(self, i: int) -> int:
        return self._alpha[i]

    def sequence_indices(self, i: int) -> list[int]:
        chain = [i]
        while i != 0:
            i = self._idom[i]
            chain.append(i)
        return chain[::-1]

    # -- public, name-level API --

    def idom(self, x: VertexId) -> VertexId | None:
        i = self._require(x)
        return None if i == 0 else self.g.vertices[self._idom[i]]

    def children(self, x: VertexId) -> frozenset[VertexId]:
        return self.g.names(self._children[self._require(x)])

    def dominated(self, x: VertexId) -> frozenset[VertexId]:
        return self.g.names(self._alpha[self._require(x)])

    def complement(self, x: VertexId) -> frozenset[VertexId]:
        """A(x): everything the seller reaches even without x."""
        return self.g.names(self.g.full_mask & ~self._alpha[self._require(x)])

    def _require(self, x: VertexId) -> int:
        try:
            return self.g.index[x]
        except KeyError:
            raise GraphError(f"unknown vertex {x!r}") from None


def dominator_tree(g: ReachableGraph) -> DominatorTree:
    if g.n == 0:
        raise GraphError("empty graph has no dominator tree")
    return DominatorTree(g)


def dominated_set(t: DominatorTree, x: VertexId) -> frozenset[VertexId]:
    return t.dominated(x)


def dominator_sequence(t: DominatorTree, x: VertexId) -> list[VertexId]:
    i = t._require(x)
    return [t.g.vertices[j] for j in t.sequence_indices(i)]
