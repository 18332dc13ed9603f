"""Almost-perfect coverings from conflict-free matchings.

Given a k-graph H with a conflict family on its edges, the auxiliary
hypergraph has P = R = V(H) and no Q. H1 is a copy of E(H). Each edge g of H
also yields k H2 edges, one per vertex x of g: x in P plus the rest of g in R.
A P-perfect matching then picks, for every vertex, an edge covering it, and
vertices appear in R at most once, so every vertex is covered once or twice.

The conflicts carried to the auxiliary side are all variants of the input
conflicts where some edges are replaced by one of their H2 copies. That
family is huge, so it stays implicit: a matching contains a variant exactly
when the underlying edges of its members contain an input conflict that uses
at least one H2 copy.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from itertools import product
from typing import Sequence

import numpy as np

from ..conflicts import ConflictSystem, ExplicitCGuard
from ..hypergraph import H1, H2, TripartiteHypergraph
from . import Instance


def build_covering(
    n: int, edges: Sequence[Sequence[int]], conflicts: Sequence[Sequence[int]] = (), d: float | None = None,
    ell: int | None = None,
) -> Instance:
    """Auxiliary instance for covering the n vertices with the given k-uniform edges.

    Conflicts are sets of indices into `edges`. H1 edge ids equal the input
    edge ids; the H2 copy of edge g at its i-th vertex follows.
    """
    edges = [tuple(sorted(e)) for e in edges]
    if not edges:
        raise ValueError("no edges")
    k = len(edges[0])
    if any(len(e) != k for e in edges):
        raise ValueError("edges must all have the same size")
    if k < 2:
        raise ValueError("edges need at least two vertices")
    aux: list[tuple[int, tuple[int, ...]]] = [(H1, e) for e in edges]
    underlying = list(range(len(edges)))
    for g, e in enumerate(edges):
        for x in e:
            aux.append((H2, (x, *(v + n for v in e if v != x))))
            underlying.append(g)
    h = TripartiteHypergraph((n, 0, n), (k, 0, k - 1), aux)
    if d is None:
        d = max((len(h.inc1[v]) for v in range(n)), default=0)
    src = CoveringConflicts(h, [tuple(sorted(c)) for c in conflicts], underlying, ell=ell)
    meta = {"app": "covering", "n": n, "k": k, "edges": [list(e) for e in edges]}
    return Instance(h, src, float(d), meta)


def decode_covering(inst: Instance, matching) -> list[int]:
    """Input edge ids used by the matching (with repetition if an edge is used twice)."""
    under = inst.conflicts.underlying
    return sorted(under[e] for e in matching.m1 | matching.m2)


class CoveringConflicts:
    """Input conflicts on H1, and their H2 variants checked through underlying edges."""

    explicit = False

    def __init__(self, h: TripartiteHypergraph, conflicts, underlying: list[int], ell: int | None = None):
        self.h = h
        self.underlying = underlying
        self.source = conflicts
        self.ell = ell if ell is not None else max((len(c) for c in conflicts), default=2)
        self.c_system = ConflictSystem(h, c=conflicts, ell=self.ell)
        self.by_edge: dict[int, list[int]] = defaultdict(list)
        for i, c in enumerate(conflicts):
            for g in c:
                self.by_edge[g].append(i)

    def sharing_pairs(self, d: float, eps: float) -> dict:
        return self.c_system.sharing_pairs(d, eps)

    def c_guard(self) -> ExplicitCGuard:
        return self.c_system.c_guard()

    def d_guard(self, m1) -> "CoveringStage2Guard":
        return CoveringStage2Guard(self, m1)

    def explicit_system(self) -> ConflictSystem:
        """Materialise every H2 variant (exponential; small inputs only)."""
        return ConflictSystem(self.h, c=self.source, d=materialise_variants(self), ell=self.ell)


def materialise_variants(src: CoveringConflicts) -> list[tuple[int, ...]]:
    copies: dict[int, list[int]] = defaultdict(list)
    for e in src.h.h2_ids:
        copies[src.underlying[e]].append(e)
    out = []
    for c in src.source:
        options = [[g] + copies[g] for g in c]
        for pick in product(*options):
            if any(src.h.klass[e] == H2 for e in pick):
                out.append(tuple(sorted(pick)))
    return out


class CoveringStage2Guard:
    def __init__(self, src: CoveringConflicts, m1):
        self.src = src
        self.m1 = frozenset(m1)
        self.present = Counter(src.underlying[e] for e in self.m1)
        self.members: dict[int, list[int]] = defaultdict(list)
        for e in sorted(self.m1):
            self.members[src.underlying[e]].append(e)

    def unsafe(self, e: int) -> bool:
        g = self.src.underlying[e]
        for i in self.src.by_edge.get(g, ()):
            if all(f == g or f in self.m1 for f in self.src.source[i]):
                return True
        return False

    def place(self, e: int) -> None:
        g = self.src.underlying[e]
        self.present[g] += 1
        self.members[g].append(e)

    def displace(self, e: int) -> None:
        g = self.src.underlying[e]
        self.present[g] -= 1
        self.members[g].remove(e)

    def violations_at(self, e: int):
        g = self.src.underlying[e]
        for i in self.src.by_edge.get(g, ()):
            conflict = self.src.source[i]
            if all(self.present[f] > 0 for f in conflict):
                options = [self.members[f] if f != g else [e] for f in conflict]
                for pick in product(*options):
                    yield ("D", tuple(sorted(pick))), tuple(sorted(pick))


def girth_conflicts(n: int, edges: Sequence[Sequence[int]], count: int, sizes=(3, 4), rng=None):
    """Random local conflicts: j pairwise disjoint edges spanning a short walk.

    A conflict is grown from a random edge by repeatedly adding a disjoint
    edge that meets a neighbour of the current set, so its members sit close
    together in H.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    edges = [tuple(e) for e in edges]
    inc: dict[int, list[int]] = defaultdict(list)
    for i, e in enumerate(edges):
        for v in e:
            inc[v].append(i)
    out: set[tuple[int, ...]] = set()
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        size = int(rng.choice(sizes))
        chosen = [int(rng.integers(len(edges)))]
        used = set(edges[chosen[0]])
        while len(chosen) < size:
            anchor = edges[chosen[int(rng.integers(len(chosen)))]]
            v = anchor[int(rng.integers(len(anchor)))]
            bridge = edges[inc[v][int(rng.integers(len(inc[v])))]]
            w = bridge[int(rng.integers(len(bridge)))]
            cand = [f for f in inc[w] if not used.intersection(edges[f])]
            if not cand:
                break
            f = cand[int(rng.integers(len(cand)))]
            chosen.append(f)
            used.update(edges[f])
        if len(chosen) == size:
            out.add(tuple(sorted(chosen)))
    return sorted(out)


def multiplicities(n: int, edges: Sequence[Sequence[int]], used: Sequence[int]) -> list[int]:
    mult = [0] * n
    for g in used:
        for v in edges[g]:
            mult[v] += 1
    return mult

