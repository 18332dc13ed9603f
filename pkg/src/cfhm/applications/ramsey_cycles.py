"""Colourings of K_n^k where every tight cycle of a given length gets more than k colours.

Auxiliary hypergraph: P holds the k-edges of K_n^k. For each of t1 "clique"
colours there is a copy of the (k-1)-sets in Q, and for each of t2 "edge"
colours a copy in R. An H1 edge is a clique K on cycle_len - 1 vertices
together with a clique colour alpha; it colours every k-edge of K with alpha.
An H2 edge is a single k-edge with an edge colour beta. A perfect matching
decodes to a colouring with t1 + t2 colours.

A partial colouring is bad when some copy Z of the tight cycle has
(#uncoloured edges of Z) + (#colours on Z) <= k: then any completion of Z uses
at most k colours. The conflict behind a bad copy is the set of auxiliary
edges colouring the repeated-colour part of Z.
"""
from __future__ import annotations

import math
from itertools import combinations, product

from ..conflicts import ConflictSystem
from ..hypergraph import H1, H2, TripartiteHypergraph
from . import Instance
from .colouring import ColourState, canonical_cycle, conflict_of_cycle, cycle_edges, find_tight_cycles


class Layout:
    """Vertex numbering for the auxiliary hypergraph."""

    def __init__(self, n: int, k: int, cycle_len: int, t1: int, t2: int):
        self.n, self.k, self.cycle_len, self.t1, self.t2 = n, k, cycle_len, t1, t2
        self.kedges = list(combinations(range(n), k))
        self.pid = {e: i for i, e in enumerate(self.kedges)}
        self.small = list(combinations(range(n), k - 1))
        self.sid = {s: i for i, s in enumerate(self.small)}
        self.n_p = len(self.kedges)
        self.block = len(self.small)
        self.q0 = self.n_p
        self.r0 = self.n_p + t1 * self.block

    def q(self, alpha: int, s) -> int:
        return self.q0 + alpha * self.block + self.sid[s]

    def r(self, beta: int, s) -> int:
        return self.r0 + beta * self.block + self.sid[s]

    def colour_of(self, h: TripartiteHypergraph, e: int) -> int:
        """Global colour index: clique colours first, then edge colours."""
        other = h.edges[e][-1]
        if h.klass[e] == H1:
            return (other - self.q0) // self.block
        return self.t1 + (other - self.r0) // self.block

    def coloured_edges(self, h: TripartiteHypergraph, e: int) -> list[tuple[int, ...]]:
        return [self.kedges[v] for v in h.edges[e] if v < self.n_p]


def palette(n: int, k: int, cycle_len: int, delta: float) -> tuple[int, int]:
    t1 = n // (cycle_len - k)
    t2 = max(1, round(n ** (1 - delta)))
    return t1, t2


def build_ramsey_cycles(n: int, k: int = 2, cycle_len: int = 4, delta: float = 0.25, explicit: bool = False) -> Instance:
    """Auxiliary instance with t1 = n // (cycle_len - k) and t2 = round(n^(1 - delta))."""
    if k < 2 or cycle_len < k + 2:
        raise ValueError("need k >= 2 and cycle_len >= k + 2")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if n < cycle_len:
        raise ValueError("n must be at least cycle_len")
    t1, t2 = palette(n, k, cycle_len, delta)
    if t1 < 1:
        raise ValueError("no clique colours at this n")
    lay = Layout(n, k, cycle_len, t1, t2)
    edges: list[tuple[int, tuple[int, ...]]] = []
    for clique in combinations(range(n), cycle_len - 1):
        ps = [lay.pid[e] for e in combinations(clique, k)]
        ss = list(combinations(clique, k - 1))
        for alpha in range(t1):
            edges.append((H1, tuple(ps + [lay.q(alpha, s) for s in ss])))
    for e in lay.kedges:
        for beta in range(t2):
            edges.append((H2, (lay.pid[e], *(lay.r(beta, s) for s in combinations(e, k - 1)))))
    h = TripartiteHypergraph(
        (lay.n_p, t1 * lay.block, t2 * lay.block),
        (math.comb(cycle_len - 1, k), math.comb(cycle_len - 1, k - 1), k),
        edges,
        validate=False,
    )
    d = n ** (cycle_len - k) / math.factorial(cycle_len - k)
    source = CycleConflicts(h, lay)
    meta = {"app": "ramsey-cycles", "n": n, "k": k, "cycle_len": cycle_len, "delta": delta, "t1": t1, "t2": t2,
            "palette": t1 + t2}
    conflicts = source.explicit_system() if explicit else source
    return Instance(h, conflicts, d, meta)


def decode_colouring(inst: Instance, matching) -> dict[tuple[int, ...], int]:
    """k-edge -> colour for a matching of the auxiliary hypergraph."""
    src = inst.conflicts if isinstance(inst.conflicts, CycleConflicts) else CycleConflicts(inst.h, _layout(inst))
    lay, h = src.lay, inst.h
    out: dict[tuple[int, ...], int] = {}
    for e in sorted(matching.m1 | matching.m2):
        for edge in lay.coloured_edges(h, e):
            out[edge] = lay.colour_of(h, e)
    return out


def _layout(inst: Instance) -> Layout:
    m = inst.meta
    return Layout(m["n"], m["k"], m["cycle_len"], m["t1"], m["t2"])


class CycleConflicts:
    """Implicit conflict source for the tight-cycle construction."""

    explicit = False

    def __init__(self, h: TripartiteHypergraph, lay: Layout):
        self.h = h
        self.lay = lay
        self.ell = lay.cycle_len

    def sharing_pairs(self, d: float, eps: float) -> dict:
        return {}

    def _colouring(self, edges) -> ColourState:
        st = ColourState(self.lay.k)
        for e in edges:
            c = self.lay.colour_of(self.h, e)
            for edge in self.lay.coloured_edges(self.h, e):
                st.set(edge, c, e)
        return st

    def c_guard(self) -> "CycleStage1Guard":
        return CycleStage1Guard(self)

    def d_guard(self, m1) -> "CycleStage2Guard":
        return CycleStage2Guard(self, m1)

    def bad_cycles(self, edges):
        """Canonical vertex sequences of bad cycle copies under the colouring of `edges`."""
        st = self._colouring(edges)
        found = set()
        for e in st.colour:
            for seq in find_tight_cycles(st, e, self.lay.n, self.ell, first_only=False):
                found.add(canonical_cycle(seq))
        return sorted(found)

    def explicit_system(self) -> ConflictSystem:
        return ConflictSystem(self.h, *enumerate_cycle_conflicts(self.h, self.lay), ell=self.ell)


class CycleStage1Guard:
    def __init__(self, src: CycleConflicts):
        self.src = src
        self.state = ColourState(src.lay.k)

    def completes(self, e: int) -> bool:
        lay, h = self.src.lay, self.src.h
        c = lay.colour_of(h, e)
        extra = {edge: c for edge in lay.coloured_edges(h, e)}
        for edge in extra:
            for _ in find_tight_cycles(self.state, edge, lay.n, self.src.ell, extra=extra):
                return True
        return False

    def add(self, e: int) -> None:
        lay, h = self.src.lay, self.src.h
        c = lay.colour_of(h, e)
        for edge in lay.coloured_edges(h, e):
            self.state.set(edge, c, e)


class CycleStage2Guard:
    def __init__(self, src: CycleConflicts, m1):
        self.src = src
        self.state = src._colouring(m1)

    def unsafe(self, e: int) -> bool:
        # an edge colour on a bad copy must repeat, so every conflict holds two H2 edges
        return False

    def place(self, e: int) -> None:
        lay, h = self.src.lay, self.src.h
        for edge in lay.coloured_edges(h, e):
            self.state.set(edge, lay.colour_of(h, e), e)

    def displace(self, e: int) -> None:
        for edge in self.src.lay.coloured_edges(self.src.h, e):
            if self.state.owner.get(edge) == e:
                self.state.unset(edge)

    def violations_at(self, e: int):
        lay, h = self.src.lay, self.src.h
        seen = set()
        for edge in lay.coloured_edges(h, e):
            for seq in find_tight_cycles(self.state, edge, lay.n, self.src.ell, first_only=False):
                conflict = conflict_of_cycle(self.state, seq)
                if conflict and conflict not in seen:
                    seen.add(conflict)
                    yield ("D", conflict), conflict


# explicit enumeration, for small n

def _set_partitions(items: list, min_block: int):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, 1):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _runs(positions: list[int], length: int) -> list[list[int]]:
    """Maximal cyclically consecutive runs of a set of cycle positions."""
    pos = sorted(positions)
    if len(pos) == length:
        return [pos]
    s = set(pos)
    starts = [p for p in pos if (p - 1) % length not in s]
    out = []
    for p in starts:
        run = [p]
        while (run[-1] + 1) % length in s:
            run.append((run[-1] + 1) % length)
        out.append(run)
    return out


def _compositions(run: list[int]):
    """Ways to cut a run into consecutive pieces."""
    m = len(run)
    for cuts in product((False, True), repeat=m - 1):
        pieces, cur = [], [run[0]]
        for i, cut in enumerate(cuts):
            if cut:
                pieces.append(cur)
                cur = []
            cur.append(run[i + 1])
        pieces.append(cur)
        yield pieces


def enumerate_cycle_conflicts(h: TripartiteHypergraph, lay: Layout):
    """Consecutive-run conflicts for every tight cycle copy, as (C, D) lists.

    Exponential in everything; meant for n up to about 8.
    """
    n, k, L = lay.n, lay.k, lay.cycle_len
    h1_index = {}
    for e in h.h1_ids:
        verts = h.edges[e]
        clique = tuple(sorted({v for p in verts if p < lay.n_p for v in lay.kedges[p]}))
        h1_index[(clique, lay.colour_of(h, e))] = e
    h2_index = {(lay.kedges[h.edges[e][0]], lay.colour_of(h, e) - lay.t1): e for e in h.h2_ids}
    from .colouring import all_tight_cycles

    found: set[tuple[int, ...]] = set()
    for seq in all_tight_cycles(n, L):
        zedges = cycle_edges(list(seq), k)
        zset = set(zedges)
        zverts = set(seq)
        for t in range(k):
            for dropped in combinations(range(L), t):
                keep = [p for p in range(L) if p not in dropped]
                for blocks in _set_partitions(keep, 2):
                    if any(len(b) < 2 for b in blocks) or len(blocks) > k - t:
                        continue
                    for kinds in product((1, 2), repeat=len(blocks)):
                        found.update(_realise(blocks, kinds, zedges, zset, zverts, lay, h1_index, h2_index))
    conflicts = sorted(found)
    minimal = _antichain(conflicts)
    c = [x for x in minimal if all(h.klass[e] == H1 for e in x)]
    d = [x for x in minimal if any(h.klass[e] == H2 for e in x)]
    return c, d


def _realise(blocks, kinds, zedges, zset, zverts, lay, h1_index, h2_index):
    n, k, L = lay.n, lay.k, lay.cycle_len
    per_block: list[list[list[tuple]]] = []
    for block, kind in zip(blocks, kinds):
        options: list[list[tuple]] = []
        if kind == 2:
            items = [("e", zedges[p]) for p in block]
            if all(len(set(a[1]) & set(b[1])) <= k - 2 for a, b in combinations(items, 2)):
                options.append(items)
        else:
            for pieces in product(*[list(_compositions(r)) for r in _runs(block, L)]):
                flat = [piece for comp in pieces for piece in comp]
                per_piece = []
                for piece in flat:
                    span = sorted({v for p in piece for v in zedges[p]})
                    cl = []
                    if len(span) <= L - 1:
                        others = [v for v in range(n) if v not in span]
                        for add in combinations(others, L - 1 - len(span)):
                            clique = tuple(sorted((*span, *add)))
                            inside = {e for e in combinations(clique, k)} & zset
                            if inside == {zedges[p] for p in piece}:
                                cl.append(("K", clique))
                    per_piece.append(cl)
                for choice in product(*per_piece):
                    if all(len(set(a[1]) & set(b[1])) <= k - 2 for a, b in combinations(choice, 2)):
                        options.append(list(choice))
        if not options:
            return
        per_block.append(options)
    n1 = sum(1 for kd in kinds if kd == 1)
    n2 = len(kinds) - n1
    for pick in product(*per_block):
        for c1 in _distinct(lay.t1, n1):
            for c2 in _distinct(lay.t2, n2):
                ids, used_p = [], set()
                i1 = i2 = 0
                ok = True
                for kind, items in zip(kinds, pick):
                    if kind == 1:
                        col = c1[i1]
                        i1 += 1
                    else:
                        col = c2[i2]
                        i2 += 1
                    for tag, obj in items:
                        e = h1_index[(obj, col)] if tag == "K" else h2_index[(obj, col)]
                        ps = set(combinations(obj, k)) if tag == "K" else {obj}
                        if used_p & ps:
                            ok = False
                        used_p |= ps
                        ids.append(e)
                if ok:
                    yield tuple(sorted(ids))


def _distinct(t: int, m: int):
    from itertools import permutations

    return permutations(range(t), m)


def _antichain(conflicts: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    sets = sorted(set(conflicts), key=len)
    kept: list[tuple[int, ...]] = []
    kept_sets: list[frozenset] = []
    for x in sets:
        fx = frozenset(x)
        if not any(s <= fx for s in kept_sets):
            kept.append(x)
            kept_sets.append(fx)
    return sorted(kept)
