"""Tripartite hypergraphs with two edge classes.

Vertices carry global integer ids laid out as one block per part: P first,
then Q, then R. H1 edges have `p` vertices in P and `q` in Q. H2 edges have
exactly one vertex in P (the anchor) and `r` in R. Edge ids are global and
follow insertion order.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from itertools import combinations
from typing import Iterable, Sequence

H1 = 1
H2 = 2


class Part(IntEnum):
    P = 0
    Q = 1
    R = 2


class HypergraphError(ValueError):
    """Structural problem with a hypergraph or its input."""


class FormatError(HypergraphError):
    """Malformed interchange file; `lineno` is 1-based."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class TripartiteHypergraph:
    """Edges are sorted vertex tuples; `klass[e]` is H1 or H2.

    Dummy H1 edges (added by padding) are exempt from the (p, q) profile and
    are flagged in `dummy`.
    """

    def __init__(
        self,
        sizes: tuple[int, int, int],
        params: tuple[int, int, int],
        edges: Iterable[tuple[int, Sequence[int]]] = (),
        dummy: Iterable[bool] | None = None,
        validate: bool = True,
    ):
        self.n_p, self.n_q, self.n_r = (int(s) for s in sizes)
        self.p, self.q, self.r = (int(x) for x in params)
        if min(self.n_p, self.n_q, self.n_r, self.p, self.q, self.r) < 0:
            raise HypergraphError("sizes and parameters must be non-negative")
        self.k = self.p + self.q
        self.edges: list[tuple[int, ...]] = []
        self.klass: list[int] = []
        for kl, verts in edges:
            self.klass.append(int(kl))
            self.edges.append(tuple(sorted(int(v) for v in verts)))
        self.dummy = list(dummy) if dummy is not None else [False] * len(self.edges)
        if len(self.dummy) != len(self.edges):
            raise HypergraphError("dummy flags do not match the edge list")
        if validate:
            self._validate()
        self._index()

    @classmethod
    def from_parts(cls, sizes, params, h1=(), h2=(), validate=True) -> "TripartiteHypergraph":
        """H1 edges get ids 0..len(h1)-1, H2 edges follow."""
        edges = [(H1, e) for e in h1] + [(H2, e) for e in h2]
        return cls(sizes, params, edges, validate=validate)

    # layout helpers
    @property
    def n_vertices(self) -> int:
        return self.n_p + self.n_q + self.n_r

    @property
    def q_offset(self) -> int:
        return self.n_p

    @property
    def r_offset(self) -> int:
        return self.n_p + self.n_q

    def part(self, v: int) -> Part:
        if v < self.n_p:
            return Part.P
        if v < self.n_p + self.n_q:
            return Part.Q
        return Part.R

    def p_vertices(self) -> range:
        return range(self.n_p)

    def r_vertices(self) -> range:
        return range(self.r_offset, self.n_vertices)

    def p_part(self, e: int) -> tuple[int, ...]:
        return tuple(v for v in self.edges[e] if v < self.n_p)

    def anchor(self, e: int) -> int:
        """The P-vertex of an H2 edge."""
        return self._anchor[e]

    def incident(self, v: int, klass: int | None = None) -> list[int]:
        if klass == H1:
            return self.inc1[v]
        if klass == H2:
            return self.inc2[v]
        return self.inc1[v] + self.inc2[v]

    def edge_ids(self, klass: int) -> list[int]:
        return self.h1_ids if klass == H1 else self.h2_ids

    def __len__(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return (
            f"TripartiteHypergraph(|P|={self.n_p}, |Q|={self.n_q}, |R|={self.n_r}, "
            f"p={self.p}, q={self.q}, r={self.r}, |H1|={len(self.h1_ids)}, |H2|={len(self.h2_ids)})"
        )

    def _validate(self) -> None:
        n = self.n_vertices
        if any(kl == H1 for kl in self.klass) and (self.p < 1 or self.k < 2):
            raise HypergraphError("H1 edges need p >= 1 and p + q >= 2")
        if any(kl == H2 for kl in self.klass) and self.r < 1:
            raise HypergraphError("H2 edges need r >= 1")
        seen: set[tuple[int, tuple[int, ...]]] = set()
        for e, (kl, verts) in enumerate(zip(self.klass, self.edges)):
            if kl not in (H1, H2):
                raise HypergraphError(f"edge {e}: unknown class {kl}")
            if any(b <= a for a, b in zip(verts, verts[1:])):
                raise HypergraphError(f"edge {e}: repeated vertex")
            if verts and (verts[0] < 0 or verts[-1] >= n):
                raise HypergraphError(f"edge {e}: vertex id out of range")
            counts = Counter(self.part(v) for v in verts)
            if kl == H1:
                want = (0, self.k, 0) if self.dummy[e] else (self.p, self.q, 0)
            else:
                want = (1, 0, self.r)
            got = (counts[Part.P], counts[Part.Q], counts[Part.R])
            if got != want:
                raise HypergraphError(f"edge {e}: part profile {got}, expected {want}")
            key = (kl, verts)
            if key in seen:
                raise HypergraphError(f"edge {e}: duplicate edge")
            seen.add(key)

    def _index(self) -> None:
        n = self.n_vertices
        self.inc1: list[list[int]] = [[] for _ in range(n)]
        self.inc2: list[list[int]] = [[] for _ in range(n)]
        self.h1_ids: list[int] = []
        self.h2_ids: list[int] = []
        self._anchor: dict[int, int] = {}
        for e, (kl, verts) in enumerate(zip(self.klass, self.edges)):
            inc = self.inc1 if kl == H1 else self.inc2
            for v in verts:
                inc[v].append(e)
            if kl == H1:
                self.h1_ids.append(e)
            else:
                self.h2_ids.append(e)
                self._anchor[e] = verts[0]


@dataclass(frozen=True)
class Matching:
    m1: frozenset[int]
    m2: frozenset[int]
    uncovered: frozenset[int]

    @classmethod
    def build(cls, h: TripartiteHypergraph, m1: Iterable[int], m2: Iterable[int] = ()) -> "Matching":
        """Record `m1`, `m2` and the P-vertices that `m1` leaves uncovered."""
        m1 = frozenset(m1)
        covered = {v for e in m1 for v in h.edges[e] if v < h.n_p}
        return cls(m1, frozenset(m2), frozenset(x for x in range(h.n_p) if x not in covered))

    def edges(self) -> frozenset[int]:
        return self.m1 | self.m2


def degree(h: TripartiteHypergraph, u: Iterable[int], klass: int | None = None) -> int:
    """Number of edges of the given class containing every vertex of `u`."""
    u = tuple(u)
    if not u:
        return len(h.edges) if klass is None else len(h.edge_ids(klass))
    base = min((h.incident(v, klass) for v in u), key=len)
    us = set(u)
    return sum(1 for e in base if us.issubset(h.edges[e]))


def max_degree(h: TripartiteHypergraph, j: int, klass: int | None = None) -> tuple[int, tuple[int, ...]]:
    """Largest degree over j-sets inside some edge, with a witness j-set."""
    ids = range(len(h.edges)) if klass is None else h.edge_ids(klass)
    if j == 1:
        best, arg = 0, ()
        for v in range(h.n_vertices):
            dv = len(h.incident(v, klass))
            if dv > best:
                best, arg = dv, (v,)
        return best, arg
    counts: Counter = Counter()
    for e in ids:
        counts.update(combinations(h.edges[e], j))
    if not counts:
        return 0, ()
    arg, best = max(counts.items(), key=lambda kv: (kv[1], [-x for x in kv[0]]))
    return best, arg


def link(h: TripartiteHypergraph, v: int, klass: int | None = None) -> list[tuple[int, ...]]:
    """The edges at `v` with `v` removed."""
    return [tuple(u for u in h.edges[e] if u != v) for e in h.incident(v, klass)]


def add_dummy_padding(h: TripartiteHypergraph, d: int) -> TripartiteHypergraph:
    """Raise every Q-vertex to H1-degree `d` with dummy edges on fresh Q-vertices.

    Edge ids of the original edges are kept; dummy edges are appended. R ids
    shift up by the number of new Q-vertices.
    """
    deficits = [(v, d - len(h.inc1[v])) for v in range(h.q_offset, h.r_offset)]
    deficits = [(v, x) for v, x in deficits if x > 0]
    fresh = sum(x for _, x in deficits) * (h.k - 1)
    shift = fresh
    r0 = h.r_offset

    def moved(v: int) -> int:
        return v + shift if v >= r0 else v

    edges = [(kl, tuple(moved(v) for v in verts)) for kl, verts in zip(h.klass, h.edges)]
    flags = list(h.dummy)
    nxt = r0
    for v, x in deficits:
        for _ in range(x):
            edges.append((H1, (v, *range(nxt, nxt + h.k - 1))))
            flags.append(True)
            nxt += h.k - 1
    return TripartiteHypergraph(
        (h.n_p, h.n_q + fresh, h.n_r), (h.p, h.q, h.r), edges, dummy=flags, validate=False
    )


# interchange format

def format_hypergraph(h: TripartiteHypergraph) -> str:
    if any(h.dummy):
        raise HypergraphError("padded hypergraphs are internal and have no file form")
    lines = [f"hg {h.n_p} {h.n_q} {h.n_r} {h.p} {h.q} {h.r}"]
    for kl, verts in zip(h.klass, h.edges):
        lines.append(f"e{kl} " + " ".join(map(str, verts)))
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> TripartiteHypergraph:
    header = None
    edges: list[tuple[int, tuple[int, ...]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            nums = [int(t) for t in tok[1:]]
        except ValueError:
            raise FormatError(f"non-integer token in {line!r}", lineno) from None
        if tok[0] == "hg":
            if header is not None:
                raise FormatError("second header", lineno)
            if len(nums) != 6:
                raise FormatError("header needs six integers", lineno)
            header = nums
        elif tok[0] in ("e1", "e2"):
            if header is None:
                raise FormatError("edge before header", lineno)
            if not nums:
                raise FormatError("empty edge", lineno)
            edges.append((int(tok[0][1]), tuple(nums)))
        else:
            raise FormatError(f"unknown record {tok[0]!r}", lineno)
    if header is None:
        raise FormatError("missing header")
    try:
        return TripartiteHypergraph(tuple(header[:3]), tuple(header[3:]), edges)
    except FormatError:
        raise
    except HypergraphError as exc:
        raise FormatError(str(exc)) from None


def read_hypergraph(path) -> TripartiteHypergraph:
    with open(path) as fh:
        return parse_hypergraph(fh.read())


def write_hypergraph(h: TripartiteHypergraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_hypergraph(h))


def hypergraph_to_json(h: TripartiteHypergraph) -> dict:
    return {
        "sizes": [h.n_p, h.n_q, h.n_r],
        "params": [h.p, h.q, h.r],
        "edges": [{"class": kl, "vertices": list(v)} for kl, v in zip(h.klass, h.edges)],
    }


def hypergraph_from_json(obj: dict) -> TripartiteHypergraph:
    return TripartiteHypergraph(
        tuple(obj["sizes"]), tuple(obj["params"]), [(e["class"], e["vertices"]) for e in obj["edges"]]
    )
