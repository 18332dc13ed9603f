"""Independent checks of matcher outputs.

Verifiers look only at the hypergraph, the raw conflict lists and the output;
they rebuild whatever they need by exhaustive rescans instead of reusing the
indexes the matchers maintain.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterable, Sequence

import numpy as np

from .hypergraph import H1, H2, TripartiteHypergraph
from .rng import make_rng


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "detail": self.detail, "witness": _plain(self.witness)}


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    fractions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "", witness=None) -> None:
        self.checks.append(Check(name, bool(passed), detail, witness))

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "checks": [c.to_json() for c in self.checks],
            "counts": _plain(self.counts),
            "fractions": _plain(self.fractions),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_plain(v) for v in items]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# matchings

def verify_matching(h: TripartiteHypergraph, matching, cs=None, perfect: bool = True) -> VerifyReport:
    """Disjointness, P-perfectness and freedom from every listed conflict.

    `cs` may carry explicit `c` and `d` lists; R-overlaps between H2 edges are
    excluded by the disjointness check itself.
    """
    rep = VerifyReport()
    m1, m2 = sorted(matching.m1), sorted(matching.m2)
    wrong1 = [e for e in m1 if h.klass[e] != H1]
    wrong2 = [e for e in m2 if h.klass[e] != H2]
    rep.add("m1-in-H1", not wrong1, f"{len(wrong1)} H2 edges in m1", wrong1[:5])
    rep.add("m2-in-H2", not wrong2, f"{len(wrong2)} H1 edges in m2", wrong2[:5])
    owner: dict[int, int] = {}
    clash = None
    for e in m1 + m2:
        for v in h.edges[e]:
            if v in owner and clash is None:
                clash = (owner[v], e, v)
            owner.setdefault(v, e)
    rep.add("disjoint", clash is None, "edges pairwise vertex-disjoint" if clash is None else "two edges share a vertex", clash)
    missing = [x for x in range(h.n_p) if x not in owner]
    if perfect:
        rep.add("P-perfect", not missing, f"{len(missing)} P-vertices uncovered", missing[:10])
    chosen = set(m1) | set(m2)
    if cs is not None and getattr(cs, "explicit", False):
        hit_c = [x for x in cs.c if chosen.issuperset(x)]
        hit_d = [x for x in cs.d if chosen.issuperset(x)]
        rep.add("C-free", not hit_c, f"{len(hit_c)} C conflicts present", hit_c[:3])
        rep.add("D-free", not hit_d, f"{len(hit_d)} D conflicts present", hit_d[:3])
        rep.counts.update({"C": len(cs.c), "D": len(cs.d)})
    rep.counts.update({"m1": len(m1), "m2": len(m2), "uncovered": len(missing)})
    rep.fractions["uncovered"] = len(missing) / h.n_p if h.n_p else 0.0
    return rep


def flagged_pairs_inside(edges: Iterable[int], flagged) -> list[tuple[int, int]]:
    chosen = set(edges)
    return sorted(p for p in flagged if p[0] in chosen and p[1] in chosen)


# unavoidability oracles

def exact_expectation(h: TripartiteHypergraph, family: Sequence[Sequence[int]]) -> Fraction:
    """Expected number of fully selected conflicts, by enumerating every choice function.

    Only the H2 part of each conflict matters; every P-vertex with an H2 edge
    picks one of them. Exponential in the number of such P-vertices.
    """
    xs = sorted({h.edges[e][0] for x in family for e in x if h.klass[e] == H2})
    options = [[e for e in range(len(h.edges)) if h.klass[e] == H2 and h.edges[e][0] == x] for x in xs]
    parts = [frozenset(e for e in x if h.klass[e] == H2) for x in family]
    total = 0
    count = 0
    for pick in product(*options):
        chosen = set(pick)
        total += sum(1 for p in parts if p <= chosen)
        count += 1
    return Fraction(total, count) if count else Fraction(0)


def mc_unavoidability_oracle(h: TripartiteHypergraph, family: Sequence[Sequence[int]], samples: int, seed: int):
    """Monte-Carlo mean and standard error of the fully selected conflict count."""
    if not family:
        return 0.0, 0.0
    xs = sorted({h.edges[e][0] for x in family for e in x if h.klass[e] == H2})
    col = {x: i for i, x in enumerate(xs)}
    options = [[e for e in range(len(h.edges)) if h.klass[e] == H2 and h.edges[e][0] == x] for x in xs]
    if any(not o for o in options):
        raise ValueError("a conflict uses a P-vertex without H2 edges")
    rng = make_rng(seed, 9)
    draws = np.empty((samples, len(xs)), dtype=np.int64)
    for i, o in enumerate(options):
        draws[:, i] = np.asarray(o)[rng.integers(len(o), size=samples)]
    counts = np.zeros(samples)
    for x in family:
        hit = np.ones(samples, dtype=bool)
        for e in x:
            if h.klass[e] == H2:
                hit &= draws[:, col[h.edges[e][0]]] == e
        counts += hit
    mean = float(counts.mean())
    err = float(counts.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, err


# colourings

def _cycle_windows(seq, k: int) -> list[tuple[int, ...]]:
    m = len(seq)
    return [tuple(sorted(seq[(i + j) % m] for j in range(k))) for i in range(m)]


def tight_cycles_by_vertices(n: int, k: int, length: int):
    """Edge lists of tight cycles, one per copy, via canonical vertex sequences."""
    for first in range(n):
        for tail in permutations(range(first + 1, n), length - 1):
            if tail[0] < tail[-1]:
                yield _cycle_windows((first, *tail), k)


def tight_cycles_by_edges(n: int, k: int, length: int):
    """Edge lists of tight cycles, deduplicated by their edge sets."""
    for verts in combinations(range(n), length):
        seen = set()
        for order in permutations(verts):
            es = frozenset(_cycle_windows(order, k))
            if es not in seen:
                seen.add(es)
                yield sorted(es)


def verify_ramsey_coloring(
    n: int, k: int, pattern, q: int, colouring: dict, strategy: str = "vertices", palette: int | None = None,
) -> VerifyReport:
    """Count copies of the pattern with fewer than q colours.

    `pattern` is ("cycle", length) or "k4". Raises ValueError on a partial colouring.
    """
    all_edges = list(combinations(range(n), k))
    missing = [e for e in all_edges if e not in colouring]
    if missing:
        raise ValueError(f"{len(missing)} uncoloured edges, e.g. {missing[:5]}")
    if pattern == "k4":
        if k != 2:
            raise ValueError("K4 pattern is for graphs")
        copies = (list(combinations(quad, 2)) for quad in combinations(range(n), 4))
        name = "K4"
    else:
        _, length = pattern
        gen = tight_cycles_by_vertices if strategy == "vertices" else tight_cycles_by_edges
        copies = gen(n, k, length)
        name = f"C{length}"
    total = bad = 0
    witness = None
    for es in copies:
        total += 1
        if len({colouring[e] for e in es}) < q:
            bad += 1
            if witness is None:
                witness = es
    used = len(set(colouring.values()))
    rep = VerifyReport()
    rep.add(f"{name}-colours>={q}", bad == 0, f"{bad} of {total} copies see fewer than {q} colours", witness)
    if palette is not None:
        rep.add("palette", used <= palette, f"{used} colours used, palette {palette}")
    rep.counts.update({"copies": total, "violations": bad, "colours": used})
    rep.fractions["violating"] = bad / total if total else 0.0
    return rep


# coverings

def verify_covering(
    n: int,
    edges: Sequence[Sequence[int]],
    conflicts: Sequence[Sequence[int]],
    used: Sequence[int],
    eps: float | None = None,
    d: float | None = None,
) -> VerifyReport:
    """Multiplicities 1..2 and conflict-freedom of a covering given by input edge ids (repeats allowed)."""
    rep = VerifyReport()
    mult = [0] * n
    for g in used:
        for v in edges[g]:
            mult[v] += 1
    zero = [v for v in range(n) if mult[v] == 0]
    over = [v for v in range(n) if mult[v] > 2]
    rep.add("covers-all", not zero, f"{len(zero)} vertices uncovered", zero[:10])
    rep.add("at-most-twice", not over, f"{len(over)} vertices covered 3+ times", over[:10])
    repeated = [g for g, c in Counter(used).items() if c > 2]
    rep.add("edge-used-at-most-twice", not repeated, f"{len(repeated)} edges used 3+ times", repeated[:5])
    present = set(used)
    hit = [c for c in conflicts if present.issuperset(c)]
    rep.add("conflict-free", not hit, f"{len(hit)} conflicts present", hit[:3])
    doubly = sum(1 for v in range(n) if mult[v] == 2)
    rep.counts.update({"vertices": n, "doubly": doubly, "edges-used": len(used), "conflicts": len(conflicts)})
    rep.counts["histogram"] = dict(sorted(Counter(mult).items()))
    rep.fractions["doubly"] = doubly / n if n else 0.0
    if eps is not None and d is not None:
        rep.fractions["doubly-bound"] = d ** -(eps**5)
    return rep


def verify_steiner(
    m: int, s: int, t: int, ell: int, chosen: Sequence[Sequence[int]],
) -> VerifyReport:
    """Covering and girth checks for a family of s-subsets of [m] (repeats allowed).

    The span check is run twice: on every j-subset of the family, and on the
    j-subsets that are packings (pairwise fewer than t common points).
    """
    rep = VerifyReport()
    sets = [tuple(sorted(S)) for S in chosen]
    cover = Counter(T for S in sets for T in combinations(S, t))
    tsets = list(combinations(range(m), t))
    zero = [T for T in tsets if cover[T] == 0]
    over = [T for T in tsets if cover[T] > 2]
    rep.add("t-sets-covered", not zero, f"{len(zero)} t-sets uncovered", zero[:5])
    rep.add("t-sets-at-most-twice", not over, f"{len(over)} t-sets covered 3+ times", over[:5])
    rep.counts["histogram"] = dict(sorted(Counter(cover[T] for T in tsets).items()))
    masks = [frozenset(S) for S in sets]
    for restricted in (False, True):
        worst = None
        checked = 0
        for j in range(2, ell + 1):
            for idx in combinations(range(len(masks)), j):
                group = [masks[i] for i in idx]
                if restricted and any(len(a & b) >= t for a, b in combinations(group, 2)):
                    continue
                checked += 1
                if len(frozenset().union(*group)) <= (s - t) * j + t and worst is None:
                    worst = [sets[i] for i in idx]
        name = "span-packings" if restricted else "span-all"
        rep.add(name, worst is None, f"{checked} subsets of size 2..{ell} checked", worst)
        rep.counts[name] = checked
    return rep
