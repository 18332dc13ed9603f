"""Conflict systems and the guard protocol used by the matchers.

A conflict is a set of edge ids. `C` holds conflicts made of H1 edges only,
`D` holds conflicts with at least one H2 edge. The matchers never iterate over
conflicts directly; they ask a guard:

stage 1 guard: ``completes(e)`` (would adding H1 edge e to the current
selection complete a C conflict) and ``add(e)``.

stage 2 guard (for a fixed H1 selection m1): ``unsafe(e)`` (e completes a D
conflict whose other edges all lie in m1), ``place(e)``, ``displace(e)`` and
``violations_at(e)``, which lists ``(key, edges)`` for every D conflict through
the placed edge e that is now fully present.

`ConflictSystem` answers these by index lookup. Application modules provide
implicit sources with the same methods.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .hypergraph import H1, H2, FormatError, HypergraphError, TripartiteHypergraph


class ConflictError(HypergraphError):
    """Malformed conflict system."""


class ConflictSystem:
    """Explicit C and D families over the edges of `h`, with incidence indexes."""

    explicit = True

    def __init__(
        self,
        h: TripartiteHypergraph,
        c: Iterable[Sequence[int]] = (),
        d: Iterable[Sequence[int]] = (),
        ell: int | None = None,
        eps: float | None = None,
    ):
        self.h = h
        self.eps = eps
        self.c = [self._canon(x, "C") for x in c]
        self.d = [self._canon(x, "D") for x in d]
        for name, fam in (("C", self.c), ("D", self.d)):
            if len(set(fam)) != len(fam):
                raise ConflictError(f"duplicate conflict in {name}")
        sizes = [len(x) for x in self.c + self.d]
        self.ell = ell if ell is not None else max(sizes, default=2)
        if sizes and max(sizes) > self.ell:
            raise ConflictError(f"conflict larger than ell={self.ell}")
        self.generated_e: list[tuple[int, int]] = []
        self.oracle: str | None = None
        self._check_cache: dict = {}
        self._build_index()

    def _canon(self, conflict: Sequence[int], fam: str) -> tuple[int, ...]:
        t = tuple(sorted(int(e) for e in conflict))
        if len(set(t)) != len(t):
            raise ConflictError(f"{fam} conflict {t} repeats an edge")
        if len(t) < 2:
            raise ConflictError(f"{fam} conflict {t} has fewer than two edges")
        for e in t:
            if not 0 <= e < len(self.h.edges):
                raise ConflictError(f"{fam} conflict {t} names unknown edge {e}")
        classes = {self.h.klass[e] for e in t}
        if fam == "C" and classes != {H1}:
            raise ConflictError(f"C conflict {t} contains an H2 edge")
        if fam == "D" and H2 not in classes:
            raise ConflictError(f"D conflict {t} has no H2 edge")
        return t

    def _build_index(self) -> None:
        h = self.h
        self.c_by_edge: dict[int, list[int]] = defaultdict(list)
        for i, x in enumerate(self.c):
            for e in x:
                self.c_by_edge[e].append(i)
        self.d_by_edge: dict[int, list[int]] = defaultdict(list)
        self.d_h1: list[tuple[int, ...]] = []
        self.d_h2: list[tuple[int, ...]] = []
        self.d_vp: list[tuple[int, ...]] = []
        self.d_by_x: dict[int, list[int]] = defaultdict(list)
        for i, x in enumerate(self.d):
            one = tuple(e for e in x if h.klass[e] == H1)
            two = tuple(e for e in x if h.klass[e] == H2)
            vp = tuple(sorted({h.anchor(e) for e in two}))
            self.d_h1.append(one)
            self.d_h2.append(two)
            self.d_vp.append(vp)
            for e in x:
                self.d_by_edge[e].append(i)
            for y in vp:
                self.d_by_x[y].append(i)

    def d_type(self, i: int) -> tuple[int, int]:
        return len(self.d_h1[i]), len(self.d_h2[i])

    def d_types(self) -> set[tuple[int, int]]:
        return {self.d_type(i) for i in range(len(self.d))}

    def family_at(self, x: int, j1: int, j2: int) -> list[int]:
        """Ids of D conflicts of type (j1, j2) with x among their P-anchors."""
        return [i for i in self.d_by_x.get(x, ()) if self.d_type(i) == (j1, j2)]

    def check_index(self) -> list[str]:
        """Rebuild the incidence maps from scratch and report mismatches."""
        problems = []
        rebuilt = defaultdict(set)
        for i, x in enumerate(self.c):
            for e in x:
                rebuilt[e].add(i)
        if {e: set(v) for e, v in self.c_by_edge.items() if v} != dict(rebuilt):
            problems.append("C index mismatch")
        rebuilt = defaultdict(set)
        for i, x in enumerate(self.d):
            for e in x:
                rebuilt[e].add(i)
        if {e: set(v) for e, v in self.d_by_edge.items() if v} != dict(rebuilt):
            problems.append("D index mismatch")
        return problems

    # guard protocol
    def c_guard(self) -> "ExplicitCGuard":
        return ExplicitCGuard(self)

    def d_guard(self, m1: Iterable[int]) -> "ExplicitDGuard":
        return ExplicitDGuard(self, m1)

    def sharing_pairs(self, d: float, eps: float) -> dict[tuple[int, int], tuple[int, int]]:
        key = ("share", d, eps)
        if key not in self._check_cache:
            self._check_cache[key] = conflict_sharing_pairs(self, d, eps)
        return self._check_cache[key]


class ExplicitCGuard:
    def __init__(self, cs: ConflictSystem):
        self.cs = cs
        self.chosen: set[int] = set()

    def completes(self, e: int) -> bool:
        chosen = self.chosen
        for i in self.cs.c_by_edge.get(e, ()):
            if all(f == e or f in chosen for f in self.cs.c[i]):
                return True
        return False

    def add(self, e: int) -> None:
        self.chosen.add(e)


class ExplicitDGuard:
    def __init__(self, cs: ConflictSystem, m1: Iterable[int]):
        self.cs = cs
        self.m1 = frozenset(m1)
        self.present: set[int] = set(self.m1)

    def unsafe(self, e: int) -> bool:
        cs = self.cs
        for i in cs.d_by_edge.get(e, ()):
            if len(cs.d_h2[i]) == 1 and all(f in self.m1 for f in cs.d_h1[i]):
                return True
        return False

    def place(self, e: int) -> None:
        self.present.add(e)

    def displace(self, e: int) -> None:
        self.present.discard(e)

    def violations_at(self, e: int) -> Iterator[tuple[tuple, tuple[int, ...]]]:
        present = self.present
        for i in self.cs.d_by_edge.get(e, ()):
            x = self.cs.d[i]
            if all(f in present for f in x):
                yield ("D", i), x


def conflict_sharing_pairs(cs: ConflictSystem, d: float, eps: float) -> dict[tuple[int, int], tuple[int, int]]:
    """Edge pairs sharing more than d^(j'-eps) semiconflicts of some size j'.

    A semiconflict of e is S with S + {e} in C. Returns {(e, f): (j', shared)}
    for e < f, reporting the first size j' that crosses the threshold.
    """
    groups: dict[frozenset, list[int]] = defaultdict(list)
    for x in cs.c:
        for e in x:
            groups[frozenset(f for f in x if f != e)].append(e)
    shared: dict[tuple[int, int, int], int] = defaultdict(int)
    for s, completing in groups.items():
        if len(completing) < 2:
            continue
        completing.sort()
        for e, f in combinations(completing, 2):
            shared[(e, f, len(s))] += 1
    out: dict[tuple[int, int], tuple[int, int]] = {}
    for (e, f, j), n in sorted(shared.items()):
        if n > d ** (j - eps) and (e, f) not in out:
            out[(e, f)] = (j, n)
    return out


def generate_overlap_conflicts(h: TripartiteHypergraph) -> list[tuple[int, int]]:
    """H2 pairs meeting only inside R."""
    pairs = set()
    for v in h.r_vertices():
        at = h.inc2[v]
        for e, f in combinations(at, 2):
            if h.anchor(e) != h.anchor(f):
                pairs.add((min(e, f), max(e, f)))
    return sorted(pairs)


# interchange format

def format_conflicts(cs: ConflictSystem) -> str:
    """`c`/`d` lines with edge ids; an `oracle NAME` line marks families left implicit."""
    lines = [f"oracle {cs.oracle}"] if cs.oracle else []
    lines += [f"c {' '.join(map(str, x))}" for x in cs.c]
    lines += [f"d {' '.join(map(str, x))}" for x in cs.d]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_conflicts(text: str, h: TripartiteHypergraph, ell: int | None = None) -> ConflictSystem:
    c, d = [], []
    oracle = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "oracle":
            if len(tok) != 2 or oracle is not None:
                raise FormatError("oracle takes one name and may appear once", lineno)
            oracle = tok[1]
            continue
        if tok[0] not in ("c", "d"):
            raise FormatError(f"unknown record {tok[0]!r}", lineno)
        try:
            ids = [int(t) for t in tok[1:]]
        except ValueError:
            raise FormatError(f"non-integer token in {line!r}", lineno) from None
        (c if tok[0] == "c" else d).append(ids)
    try:
        cs = ConflictSystem(h, c, d, ell=ell)
    except HypergraphError as exc:
        raise FormatError(str(exc)) from None
    cs.oracle = oracle
    return cs


def read_conflicts(path, h: TripartiteHypergraph, ell: int | None = None) -> ConflictSystem:
    with open(path) as fh:
        return parse_conflicts(fh.read(), h, ell)


def write_conflicts(cs: ConflictSystem, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_conflicts(cs))
