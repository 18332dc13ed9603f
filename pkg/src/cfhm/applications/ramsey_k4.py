"""Colourings of K_n where every K_4 sees at least five colours.

P holds the edges of K_n. Q is a random subset of t1 copies of V(K_n): each
copy v_alpha survives independently with probability 1/(1+rho). An H1 edge is
a triangle uvw with an apex u and two distinct colours alpha, beta with u, v,
w alive in copy alpha, v, w alive in copy beta and u dead in copy beta. It
colours uv, uw with alpha and vw with beta. R holds t2 copies of V(K_n) and
an H2 edge is an edge uv with a colour beta in T2.

Within a matching every colour class is a union of vertex-disjoint edges and
two-edge paths, so a K_4 with at most four colours contains an alternating
two-coloured 4-cycle. Conflicts are the auxiliary edges colouring such a
4-cycle; they are found by the same bounded walk as for tight cycles, with
k = 2 and cycle length 4.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import combinations, product

import numpy as np

from ..conflicts import ConflictSystem
from ..hypergraph import H1, H2, TripartiteHypergraph
from ..rng import BUILD, make_rng
from . import Instance
from .colouring import ColourState, all_tight_cycles, canonical_cycle, conflict_of_cycle, cycle_edges, find_tight_cycles


def k4_palette(n: int, delta: float, rho: float | None = None) -> tuple[int, int, float]:
    rho = n ** -delta if rho is None else rho
    t1 = round((1 + rho) * 5 * n / 6)
    t2 = max(1, round(n ** (1 - delta)))
    return t1, t2, rho


class K4Layout:
    def __init__(self, n: int, t1: int, t2: int, alive: np.ndarray):
        self.n, self.t1, self.t2 = n, t1, t2
        self.pairs = list(combinations(range(n), 2))
        self.pid = {e: i for i, e in enumerate(self.pairs)}
        self.n_p = len(self.pairs)
        self.alive = alive
        self.qid: dict[tuple[int, int], int] = {}
        for a, v in zip(*np.nonzero(alive)):
            self.qid[(int(a), int(v))] = self.n_p + len(self.qid)
        self.r0 = self.n_p + len(self.qid)

    def r(self, beta: int, v: int) -> int:
        return self.r0 + beta * self.n + v

    def colouring_of(self, h: TripartiteHypergraph, e: int) -> list[tuple[tuple[int, int], int]]:
        """(edge, colour) pairs set by auxiliary edge e; T2 colours are offset by t1."""
        verts = h.edges[e]
        if h.klass[e] == H2:
            beta = (verts[1] - self.r0) // self.n
            return [(self.pairs[verts[0]], self.t1 + beta)]
        inv = self.qinv
        copies = defaultdict(set)
        for x in verts:
            if x >= self.n_p:
                a, v = inv[x]
                copies[a].add(v)
        (alpha,) = [a for a, vs in copies.items() if len(vs) == 3]
        (beta,) = [a for a, vs in copies.items() if len(vs) == 2]
        v, w = sorted(copies[beta])
        (u,) = copies[alpha] - copies[beta]
        return [(tuple(sorted((u, v))), alpha), (tuple(sorted((u, w))), alpha), ((v, w), beta)]

    @property
    def qinv(self) -> dict[int, tuple[int, int]]:
        if not hasattr(self, "_qinv"):
            self._qinv = {i: av for av, i in self.qid.items()}
        return self._qinv


def build_ramsey_k4(n: int, delta: float = 0.25, seed: int = 0, rho: float | None = None, explicit: bool = False) -> Instance:
    """Auxiliary instance with t1 = round((1 + rho) 5n/6), rho = n^-delta, t2 = round(n^(1 - delta))."""
    if n < 4:
        raise ValueError("n must be at least 4")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    t1, t2, rho = k4_palette(n, delta, rho)
    if rho < 0:
        raise ValueError("rho must be non-negative")
    p_del = rho / (1 + rho)
    rng = make_rng(seed, BUILD)
    alive = rng.random((t1, n)) >= p_del
    lay = K4Layout(n, t1, t2, alive)
    edges: list[tuple[int, tuple[int, ...]]] = []
    for tri in combinations(range(n), 3):
        ps = [lay.pid[e] for e in combinations(tri, 2)]
        for u in tri:
            v, w = (x for x in tri if x != u)
            both = alive[:, v] & alive[:, w]
            a_cols = np.flatnonzero(both & alive[:, u])
            b_cols = np.flatnonzero(both & ~alive[:, u])
            for a, b in product(a_cols.tolist(), b_cols.tolist()):
                q = sorted((lay.qid[(a, u)], lay.qid[(a, v)], lay.qid[(a, w)], lay.qid[(b, v)], lay.qid[(b, w)]))
                edges.append((H1, (*ps, *q)))
    for e in lay.pairs:
        for beta in range(t2):
            edges.append((H2, (lay.pid[e], lay.r(beta, e[0]), lay.r(beta, e[1]))))
    h = TripartiteHypergraph((lay.n_p, len(lay.qid), t2 * n), (3, 5, 2), edges, validate=False)
    d = sum(len(h.inc1[x]) for x in range(lay.n_p)) / lay.n_p
    source = K4Conflicts(h, lay)
    meta = {"app": "ramsey-k4", "n": n, "delta": delta, "seed": seed, "rho": rho, "t1": t1, "t2": t2,
            "palette": t1 + t2, "alive": alive.astype(int).tolist()}
    return Instance(h, source.explicit_system() if explicit else source, float(d), meta)


def k4_layout(inst: Instance) -> K4Layout:
    m = inst.meta
    return K4Layout(m["n"], m["t1"], m["t2"], np.array(m["alive"], dtype=bool))


def decode_k4_colouring(inst: Instance, matching) -> dict[tuple[int, int], int]:
    lay = inst.conflicts.lay if isinstance(inst.conflicts, K4Conflicts) else k4_layout(inst)
    out: dict[tuple[int, int], int] = {}
    for e in sorted(matching.m1 | matching.m2):
        for edge, c in lay.colouring_of(inst.h, e):
            out[edge] = c
    return out


class K4Conflicts:
    """Implicit conflicts: alternating two-coloured 4-cycles."""

    explicit = False

    def __init__(self, h: TripartiteHypergraph, lay: K4Layout):
        self.h = h
        self.lay = lay
        self.ell = 4
        self._cache: dict[int, list] = {}

    def colours(self, e: int):
        if e not in self._cache:
            self._cache[e] = self.lay.colouring_of(self.h, e)
        return self._cache[e]

    def sharing_pairs(self, d: float, eps: float) -> dict:
        return {}

    def state_of(self, edges) -> ColourState:
        st = ColourState(2)
        for e in edges:
            for edge, c in self.colours(e):
                st.set(edge, c, e)
        return st

    def c_guard(self) -> "K4Stage1Guard":
        return K4Stage1Guard(self)

    def d_guard(self, m1) -> "K4Stage2Guard":
        return K4Stage2Guard(self, m1)

    def bad_cycles(self, edges):
        st = self.state_of(edges)
        found = set()
        for e in st.colour:
            for seq in find_tight_cycles(st, e, self.lay.n, 4, first_only=False):
                found.add(canonical_cycle(seq))
        return sorted(found)

    def explicit_system(self) -> ConflictSystem:
        return ConflictSystem(self.h, *enumerate_k4_conflicts(self.h, self.lay, self), ell=4)


class K4Stage1Guard:
    def __init__(self, src: K4Conflicts):
        self.src = src
        self.state = ColourState(2)

    def completes(self, e: int) -> bool:
        extra = dict(self.src.colours(e))
        for edge in extra:
            for _ in find_tight_cycles(self.state, edge, self.src.lay.n, 4, extra=extra):
                return True
        return False

    def add(self, e: int) -> None:
        for edge, c in self.src.colours(e):
            self.state.set(edge, c, e)


class K4Stage2Guard:
    def __init__(self, src: K4Conflicts, m1):
        self.src = src
        self.state = src.state_of(m1)

    def unsafe(self, e: int) -> bool:
        # a T2 colour on an alternating 4-cycle sits on two opposite edges
        return False

    def place(self, e: int) -> None:
        for edge, c in self.src.colours(e):
            self.state.set(edge, c, e)

    def displace(self, e: int) -> None:
        for edge, _ in self.src.colours(e):
            if self.state.owner.get(edge) == e:
                self.state.unset(edge)

    def violations_at(self, e: int):
        seen = set()
        for edge, _ in self.src.colours(e):
            for seq in find_tight_cycles(self.state, edge, self.src.lay.n, 4, first_only=False):
                conflict = conflict_of_cycle(self.state, seq)
                if conflict and conflict not in seen:
                    seen.add(conflict)
                    yield ("D", conflict), conflict


def enumerate_k4_conflicts(h: TripartiteHypergraph, lay: K4Layout, src: K4Conflicts):
    """Every alternating colouring of every 4-cycle realisable by a matching, as (C, D).

    Built directly from the (edge, colour) -> auxiliary edge index; for small n only.
    """
    by_colour: dict[tuple[tuple[int, int], int], list[int]] = defaultdict(list)
    for e in range(len(h.edges)):
        for edge, c in src.colours(e):
            by_colour[(edge, c)].append(e)
    n_colours = lay.t1 + lay.t2
    found: set[tuple[int, ...]] = set()
    for seq in all_tight_cycles(lay.n, 4):
        z = cycle_edges(list(seq), 2)
        for a in range(n_colours):
            for b in range(n_colours):
                if a == b:
                    continue
                cols = [a, b, a, b]
                options = [by_colour.get((edge, c), []) for edge, c in zip(z, cols)]
                for pick in product(*options):
                    owners = sorted(set(pick))
                    if _consistent(h, owners, src, dict(zip(z, cols))) and _is_matching(h, owners):
                        found.add(tuple(owners))
    c = sorted(x for x in found if all(h.klass[e] == H1 for e in x))
    d = sorted(x for x in found if any(h.klass[e] == H2 for e in x))
    return c, d


def _consistent(h, owners, src, wanted) -> bool:
    """Each owner colours the cycle edges it touches as wanted."""
    for e in owners:
        for edge, c in src.colours(e):
            if edge in wanted and wanted[edge] != c:
                return False
    return True


def _is_matching(h: TripartiteHypergraph, ids) -> bool:
    seen: set[int] = set()
    for e in ids:
        vs = set(h.edges[e])
        if seen & vs:
            return False
        seen |= vs
    return True
