"""Test functions evaluated on H1 selections, and incremental trackers.

All three functions are gated by testability: a set of H1 edges is testable
when it is a matching, contains no C conflict, and contains no flagged
conflict-sharing pair.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .boundedness import unavoidability
from .conflicts import ConflictSystem


class Testability:
    """Membership test for testable H1 sets."""

    def __init__(self, cs: ConflictSystem, flagged: Iterable[tuple[int, int]] = ()):
        self.cs = cs
        self.h = cs.h
        self.partners: dict[int, set[int]] = defaultdict(set)
        for e, f in flagged:
            self.partners[e].add(f)
            self.partners[f].add(e)

    def __call__(self, edges: Iterable[int]) -> bool:
        edges = set(edges)
        seen: set[int] = set()
        for e in edges:
            verts = self.h.edges[e]
            if any(v in seen for v in verts):
                return False
            seen.update(verts)
            if self.partners.get(e, set()) & edges:
                return False
            for i in self.cs.c_by_edge.get(e, ()):
                if edges.issuperset(self.cs.c[i]):
                    return False
        return True


def _gate(cs: ConflictSystem, gate: Testability | None) -> Testability:
    return gate if gate is not None else Testability(cs)


def _weight(cs: ConflictSystem, i: int) -> float:
    return float(unavoidability(cs.h, cs.d[i]))


def eval_w_x(cs: ConflictSystem, x: int, j1: int, j2: int, m: Iterable[int], gate: Testability | None = None) -> float:
    """Sum of A(D) over D in the (j1, j2) family at x whose H1-part lies in m.

    H1-parts that contain x or are not testable contribute nothing.
    """
    gate = _gate(cs, gate)
    m = set(m)
    total = 0.0
    for i in cs.family_at(x, j1, j2):
        part = cs.d_h1[i]
        if not m.issuperset(part):
            continue
        if any(x in cs.h.edges[e] for e in part):
            continue
        if gate(part):
            total += _weight(cs, i)
    return total


def eval_w_x_prime(cs: ConflictSystem, x: int, j1: int, j2: int, m: Iterable[int], gate: Testability | None = None) -> float:
    """Blocked-mass function on (j1+1)-sets C' of m.

    Sums A(D) over D in the family at x, over y in its other anchors, and over
    edges e of m outside the H1-part of D that contain y, whenever the H1-part
    plus e is testable.
    """
    gate = _gate(cs, gate)
    m = set(m)
    h = cs.h
    by_p: dict[int, list[int]] = defaultdict(list)
    for e in m:
        for v in h.edges[e]:
            if v < h.n_p:
                by_p[v].append(e)
    total = 0.0
    for i in cs.family_at(x, j1, j2):
        part = cs.d_h1[i]
        if not m.issuperset(part):
            continue
        a = _weight(cs, i)
        for y in cs.d_vp[i]:
            if y == x:
                continue
            for e in by_p.get(y, ()):
                if e not in part and gate((*part, e)):
                    total += a
    return total


def _normalise_profile(b) -> dict[int, int]:
    if isinstance(b, dict):
        return {int(k): int(v) for k, v in b.items() if v}
    return {j + 1: int(v) for j, v in enumerate(b) if v}


def _profile_parts(cs: ConflictSystem, e: int) -> list[tuple[int, ...]]:
    """H1-parts of the (j, 1) conflicts through the H2 edge e, for j >= 1."""
    return [cs.d_h1[i] for i in cs.d_by_edge.get(e, ()) if len(cs.d_h2[i]) == 1 and cs.d_h1[i]]


def _count_collections(parts: Sequence[tuple[int, ...]], profile: dict[int, int], gate) -> int:
    """Number of sets of parts, pairwise disjoint, sizes following `profile`, with testable union."""
    by_size: dict[int, list[tuple[int, ...]]] = defaultdict(list)
    for part in parts:
        by_size[len(part)].append(part)
    sizes = sorted(profile)
    count = 0

    def rec(si: int, used: set[int], chosen: list) -> None:
        nonlocal count
        if si == len(sizes):
            if gate(used):
                count += 1
            return
        j = sizes[si]
        for combo in combinations(by_size.get(j, ()), profile[j]):
            flat = [f for part in combo for f in part]
            if len(set(flat)) != len(flat) or used.intersection(flat):
                continue
            rec(si + 1, used | set(flat), chosen + list(combo))

    rec(0, set(), [])
    return count


def eval_w_x_b(cs: ConflictSystem, x: int, b, m: Iterable[int], gate: Testability | None = None) -> float:
    """Safe-edge test function with size profile b (b[j] parts of size j).

    For each H2 edge e at x, counts collections of H1-parts of (j, 1) conflicts
    through e, inside m, pairwise disjoint, with testable union; divided by the
    H2 degree of x.
    """
    gate = _gate(cs, gate)
    profile = _normalise_profile(b)
    m = set(m)
    at_x = cs.h.inc2[x]
    if not at_x:
        return 0.0
    total = 0
    for e in at_x:
        parts = [p for p in _profile_parts(cs, e) if m.issuperset(p)]
        total += _count_collections(parts, profile, gate)
    return total / len(at_x)


# normalisers

def alpha_x(cs: ConflictSystem, x: int, j1: int, j2: int, d: float) -> float:
    """Larger of the scaled weighted H1-codegree and scaled pair mass at x."""
    fam = cs.family_at(x, j1, j2)
    best = 0.0
    for jp in range(1, j1 + 1):
        acc: dict = defaultdict(float)
        for i in fam:
            for f in combinations(cs.d_h1[i], jp):
                acc[f] += _weight(cs, i)
        if acc:
            best = max(best, d ** (jp - j1) * max(acc.values()))
    pair: dict = defaultdict(float)
    for i in fam:
        for y in cs.d_vp[i]:
            if y != x:
                pair[y] += _weight(cs, i)
    if pair:
        best = max(best, d**-j1 * max(pair.values()))
    return best


def beta_x(cs: ConflictSystem, x: int, d: float) -> float:
    """Normaliser for the safe-edge functions at x."""
    h = cs.h
    dx = len(h.inc2[x])
    best = 0.0
    by_j: dict[int, list[int]] = defaultdict(list)
    for i in cs.d_by_x.get(x, ()):
        j1, j2 = cs.d_type(i)
        if j2 == 1 and j1 >= 1:
            by_j[j1].append(i)
    for j1, fam in by_j.items():
        for jp in range(1, j1):
            acc: dict = defaultdict(int)
            for i in fam:
                for f in combinations(cs.d_h1[i], jp):
                    acc[(f, cs.d_h2[i])] += 1
            best = max(best, d ** (jp - j1) * max(acc.values()))
        if dx:
            acc = defaultdict(int)
            for i in fam:
                acc[cs.d_h1[i]] += 1
            best = max(best, max(acc.values()) / dx)
    return best


# trackers

@dataclass
class TrackerSpec:
    kind: str  # "w_x", "w_x_prime" or "w_x_b"
    x: int
    j1: int = 0
    j2: int = 0
    b: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "TrackerSpec":
        """Parse "w_x:x=3,j1=1,j2=2" or "w_x_b:x=3,b=2-1"."""
        kind, _, rest = text.partition(":")
        kw: dict = {}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            kw[key.strip()] = val.strip()
        if kind not in ("w_x", "w_x_prime", "w_x_b"):
            raise ValueError(f"unknown tracker kind {kind!r}")
        b = tuple(int(v) for v in kw.get("b", "").split("-") if v)
        return cls(kind, int(kw["x"]), int(kw.get("j1", 0)), int(kw.get("j2", 0)), b)

    def uniformity(self) -> int:
        if self.kind == "w_x":
            return self.j1
        if self.kind == "w_x_prime":
            return self.j1 + 1
        return sum((j + 1) * n for j, n in enumerate(self.b))

    def params(self) -> dict:
        if self.kind == "w_x_b":
            return {"x": self.x, "b": list(self.b)}
        return {"x": self.x, "j1": self.j1, "j2": self.j2}


def evaluate(spec: TrackerSpec, cs: ConflictSystem, m: Iterable[int], gate: Testability | None = None) -> float:
    if spec.kind == "w_x":
        return eval_w_x(cs, spec.x, spec.j1, spec.j2, m, gate)
    if spec.kind == "w_x_prime":
        return eval_w_x_prime(cs, spec.x, spec.j1, spec.j2, m, gate)
    return eval_w_x_b(cs, spec.x, spec.b, m, gate)


@dataclass
class Tracker:
    """Follows one test function along the greedy, updated per added edge."""

    spec: TrackerSpec
    cs: ConflictSystem
    gate: Testability
    value: float = 0.0
    chosen: set = field(default_factory=set)

    def __post_init__(self):
        cs, s = self.cs, self.spec
        self._fam = cs.family_at(s.x, s.j1, s.j2) if s.kind != "w_x_b" else []
        self._fam_by_edge: dict[int, list[int]] = defaultdict(list)
        for i in self._fam:
            for e in cs.d_h1[i]:
                self._fam_by_edge[e].append(i)
        self._complete_by_y: dict[int, list[int]] = defaultdict(list)
        self._by_p: dict[int, int] = {}
        self._per_edge: dict[int, int] = {}
        if s.kind == "w_x_b":
            self._profile = _normalise_profile(s.b)
            self._x_edges = list(cs.h.inc2[s.x])
            self._edge_watch: dict[int, set[int]] = defaultdict(set)
            for e in self._x_edges:
                for part in _profile_parts(cs, e):
                    for f in part:
                        self._edge_watch[f].add(e)
        self.value = evaluate(s, cs, (), self.gate)
        if s.kind == "w_x_prime":
            for i in self._fam:
                if not cs.d_h1[i]:
                    self._complete(i)

    def _complete(self, i: int) -> None:
        for y in self.cs.d_vp[i]:
            if y != self.spec.x:
                self._complete_by_y[y].append(i)

    def add(self, f: int) -> None:
        cs, s, h = self.cs, self.spec, self.cs.h
        chosen = self.chosen
        chosen.add(f)
        if s.kind == "w_x":
            for i in self._fam_by_edge.get(f, ()):
                part = cs.d_h1[i]
                if all(e in chosen for e in part) and not any(s.x in h.edges[e] for e in part):
                    self.value += _weight(cs, i)
        elif s.kind == "w_x_prime":
            fp = [v for v in h.edges[f] if v < h.n_p]
            for y in fp:
                for i in self._complete_by_y.get(y, ()):
                    self.value += _weight(cs, i)
            for v in fp:
                self._by_p[v] = f
            for i in self._fam_by_edge.get(f, ()):
                part = cs.d_h1[i]
                if all(e in chosen for e in part):
                    a = _weight(cs, i)
                    for y in cs.d_vp[i]:
                        if y != s.x and y in self._by_p and self._by_p[y] not in part:
                            self.value += a
                    self._complete(i)
        else:
            touched = self._edge_watch.get(f, ())
            if touched:
                for e in touched:
                    parts = [p for p in _profile_parts(cs, e) if chosen.issuperset(p)]
                    self._per_edge[e] = _count_collections(parts, self._profile, self.gate)
                self.value = sum(self._per_edge.values()) / len(self._x_edges)

    def recompute(self) -> float:
        return evaluate(self.spec, self.cs, self.chosen, self.gate)

    def prediction(self, d: float, universe: Iterable[int]) -> float:
        """d^{-j} times the function evaluated on the full H1 edge set."""
        return d ** -self.spec.uniformity() * evaluate(self.spec, self.cs, universe, self.gate)
