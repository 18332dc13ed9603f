"""Unavoidability weights and the degree and boundedness condition checks.

The weight of a conflict is the probability that it is fully selected when
every P-vertex independently picks one of its H2 edges uniformly:
``A(D) = prod over anchors y of 1 / d_H2(y)``. The condition checks return a
`ConditionReport`; each entry compares a measured quantity against its bound
and also records the largest eps in (0, 1) for which the entry would hold.
"""
from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .conflicts import ConflictSystem
from .hypergraph import H1, H2, TripartiteHypergraph, max_degree

EXACT_DEGREE_LIMIT = 10**6
EXACT_SIZE_LIMIT = 12
REL_TOL = 1e-9


def _h2_degree(h: TripartiteHypergraph, x: int) -> int:
    return len(h.inc2[x])


def exact_ok(h: TripartiteHypergraph, anchors: Sequence[int]) -> bool:
    return len(anchors) <= EXACT_SIZE_LIMIT and all(_h2_degree(h, y) <= EXACT_DEGREE_LIMIT for y in anchors)


def unavoidability(h: TripartiteHypergraph, conflict: Iterable[int], exact: bool | None = None):
    """A of one conflict: a Fraction when exact arithmetic applies, else a float."""
    anchors = sorted({h.anchor(e) for e in conflict if h.klass[e] == H2})
    if exact is None:
        exact = exact_ok(h, anchors)
    denom = 1
    for y in anchors:
        dy = _h2_degree(h, y)
        if dy == 0:
            raise ValueError(f"P-vertex {y} has no H2 edge")
        denom *= dy
    return Fraction(1, denom) if exact else 1.0 / denom


def family_unavoidability(h: TripartiteHypergraph, family: Iterable[Iterable[int]], exact: bool | None = None):
    """A of a family: the sum over its conflicts."""
    family = [tuple(x) for x in family]
    if exact is None:
        exact = all(exact_ok(h, sorted({h.anchor(e) for e in x if h.klass[e] == H2})) for x in family)
    total = Fraction(0) if exact else 0.0
    for x in family:
        total += unavoidability(h, x, exact)
    return total


def vertex_unavoidability(h: TripartiteHypergraph, v: int) -> Fraction:
    """Sum over anchors x of d_H2(x, v) / d_H2(x) for an R-vertex v."""
    per_anchor = Counter(h.anchor(e) for e in h.inc2[v])
    return sum((Fraction(c, _h2_degree(h, x)) for x, c in per_anchor.items()), Fraction(0))


def weighted_max_degree(h: TripartiteHypergraph, family: Iterable[Sequence[int]], j1: int, j2: int):
    """Max over (j1 H1-edges, j2 H2-edges) of the A-mass of family members containing them.

    Returns (value, witness) where the witness is the pair of edge tuples.
    """
    acc: dict = defaultdict(Fraction)
    for x in family:
        one = [e for e in x if h.klass[e] == H1]
        two = [e for e in x if h.klass[e] == H2]
        a = unavoidability(h, x, exact=True)
        for c in combinations(one, j1):
            for dd in combinations(two, j2):
                acc[(c, dd)] += a
    if not acc:
        return Fraction(0), None
    key = max(acc, key=lambda k: (acc[k], [-e for e in k[0] + k[1]]))
    return acc[key], key


@dataclass
class ConditionEntry:
    label: str
    holds: bool
    lhs: float
    rhs: float
    witness: object = None
    sup_eps: float | None = None


@dataclass
class ConditionReport:
    entries: list[ConditionEntry] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)

    def failures(self) -> list[ConditionEntry]:
        return [e for e in self.entries if not e.holds]

    def get(self, label: str) -> ConditionEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    def to_json(self) -> dict:
        return {"params": self.params, "holds": self.holds, "conditions": [_jsonable(asdict(e)) for e in self.entries]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _le(lhs, rhs) -> bool:
    if lhs <= rhs:
        return True
    return float(lhs) <= float(rhs) * (1 + REL_TOL)


def largest_passing_eps(holds_at: Callable[[float], bool], grid: int = 400, refine: int = 40) -> float | None:
    """Supremum of eps in (0, 1) where `holds_at` is true, assuming an interval.

    Scans a grid, then bisects between the last passing point and its failing
    right neighbour. Returns None if no grid point passes.
    """
    points = [i / grid for i in range(1, grid)]
    passing = [t for t in points if holds_at(t)]
    if not passing:
        return None
    lo = max(passing)
    hi = lo + 1 / grid
    if hi >= 1 or holds_at(hi):
        return 1.0 if hi >= 1 else hi
    for _ in range(refine):
        mid = (lo + hi) / 2
        if holds_at(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _entry(label, lhs, rhs_fn: Callable[[float], float], eps, witness=None, lhs_fn=None) -> ConditionEntry:
    """Condition lhs <= rhs_fn(eps); `lhs_fn` overrides when the left side depends on eps."""
    get_lhs = lhs_fn or (lambda _e: lhs)
    holds = _le(get_lhs(eps), rhs_fn(eps))
    sup = largest_passing_eps(lambda t: _le(get_lhs(t), rhs_fn(t)))
    return ConditionEntry(label, bool(holds), float(get_lhs(eps)), float(rhs_fn(eps)), witness, sup)


def check_h_conditions(h: TripartiteHypergraph, d: float, eps: float) -> ConditionReport:
    """Degree conditions on H1 and H2, both the strong and the relaxed H2 forms."""
    rep = ConditionReport(params={"d": d, "eps": eps})
    E = rep.entries
    n_p, n_pq = h.n_p, h.n_p + h.n_q
    E.append(_entry("size.P", d, lambda t: n_p, eps, lhs_fn=lambda t: d**t))
    E.append(_entry("size.PQ", n_pq, lambda t: math.exp(d ** (t**3)), eps))
    E.append(ConditionEntry("nonempty", bool(h.h1_ids and h.h2_ids), len(h.h1_ids), len(h.h2_ids)))

    p_deg = [(len(h.inc1[x]), x) for x in h.p_vertices()]
    min_p, arg_p = min(p_deg) if p_deg else (0, None)
    max_all, arg_all = max_degree(h, 1, H1)
    E.append(_entry("H1.lower", None, lambda t: min_p, eps, witness=arg_p, lhs_fn=lambda t: (1 - d**-t) * d))
    E.append(_entry("H1.upper", max_all, lambda t: d, eps, witness=list(arg_all)))
    co, arg_co = max_degree(h, 2, H1)
    E.append(_entry("H2", co, lambda t: d ** (1 - t), eps, witness=list(arg_co)))

    d2 = [(_h2_degree(h, x), x) for x in h.p_vertices()]
    delta2, arg_delta2 = min(d2) if d2 else (0, None)
    r_deg = [(len(h.inc2[v]), v) for v in h.r_vertices()]
    max_r, arg_r = max(r_deg) if r_deg else (0, None)
    E.append(_entry("H3", max_r, lambda t: d ** (t**4) * delta2, eps, witness=arg_r))

    worst_pair, worst_ratio, arg_pair, arg_ratio = 0, 0.0, None, None
    for x in h.p_vertices():
        if not h.inc2[x]:
            continue
        counts = Counter(v for e in h.inc2[x] for v in h.edges[e] if v != x)
        v, c = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))
        if c > worst_pair:
            worst_pair, arg_pair = c, (x, v)
        if c / len(h.inc2[x]) > worst_ratio:
            worst_ratio, arg_ratio = c / len(h.inc2[x]), (x, v)
    E.append(_entry("H4", worst_pair, lambda t: d**-t * delta2, eps, witness=arg_pair))

    worst_a, arg_a = Fraction(0), None
    for v in h.r_vertices():
        a = vertex_unavoidability(h, v)
        if a > worst_a:
            worst_a, arg_a = a, v
    E.append(ConditionEntry("H2.min_degree", delta2 >= 1, 1, delta2, arg_delta2))
    E.append(_entry("H3'", worst_a, lambda t: d ** (t**4), eps, witness=arg_a))
    E.append(_entry("H4'", worst_ratio, lambda t: d**-t, eps, witness=arg_ratio))
    return rep


def check_c_conditions(cs: ConflictSystem, d: float, eps: float) -> ConditionReport:
    """Size and degree bounds on the H1-only family."""
    rep = ConditionReport(params={"d": d, "eps": eps, "ell": cs.ell})
    E = rep.entries
    ell = cs.ell
    if cs.c:
        small = min(cs.c, key=len)
        big = max(cs.c, key=len)
        E.append(_entry("C1.min", 3, lambda t: len(small), eps, witness=list(small)))
        E.append(_entry("C1.max", len(big), lambda t: ell, eps, witness=list(big)))
    by_size: dict[int, list] = defaultdict(list)
    for x in cs.c:
        by_size[len(x)].append(x)
    for j in sorted(by_size):
        fam = by_size[j]
        for jp in range(1, j):
            counts = Counter(s for x in fam for s in combinations(x, jp))
            sub, val = max(counts.items(), key=lambda kv: (kv[1], [-e for e in kv[0]]))
            if jp == 1:
                E.append(_entry(f"C2[j={j}]", val, lambda t, j=j: ell * d ** (j - 1), eps, witness=list(sub)))
            else:
                E.append(
                    _entry(f"C3[j={j},j'={jp}]", val, lambda t, j=j, jp=jp: d ** (j - jp - t), eps, witness=list(sub))
                )
    return rep


def _d_statistics(cs: ConflictSystem):
    """Per-type counts and A-masses at each anchor, for the D and E checks.

    Tables are keyed by conflict type, then by anchor (and sub-tuple). Masses
    are accumulated in double precision; comparisons allow a relative slack
    of REL_TOL.
    """
    h = cs.h
    inv = {x: 1.0 / len(h.inc2[x]) for x in cs.d_by_x}
    names = ("count_x", "mass_x", "count_xF", "mass_xF", "count_xy", "mass_xy", "count_e", "count_Fe")
    st = {name: defaultdict(lambda: defaultdict(int)) for name in names}
    for i in range(len(cs.d)):
        one, two, vp = cs.d_h1[i], cs.d_h2[i], cs.d_vp[i]
        t = (len(one), len(two))
        a = math.prod(inv[y] for y in vp)
        cx, mx = st["count_x"][t], st["mass_x"][t]
        cf, mf = st["count_xF"][t], st["mass_xF"][t]
        subsets = [f for jp in range(1, t[0] + 1) for f in combinations(one, jp)]
        for y in vp:
            cx[y] += 1
            mx[y] += a
            for f in subsets:
                cf[(len(f), y, f)] += 1
                mf[(len(f), y, f)] += a
        if t[1] >= 2:
            cxy, mxy = st["count_xy"][t], st["mass_xy"][t]
            for pair in combinations(vp, 2):
                cxy[pair] += 1
                mxy[pair] += a
        if t[1] == 1:
            st["count_e"][t][two[0]] += 1
            cfe = st["count_Fe"][t]
            for f in subsets:
                if len(f) < t[0]:
                    cfe[(len(f), f, two[0])] += 1
    return st


def _tl(t) -> str:
    return f"({t[0]},{t[1]})"


def _max_of(table: dict, jp: int | None = None) -> tuple:
    """Largest value (smallest key on ties), optionally restricted to keys starting with jp."""
    best, arg = 0, None
    for key, val in table.items():
        if jp is not None and key[0] != jp:
            continue
        if val > best or (val == best and arg is not None and key < arg):
            best, arg = val, key
    return best, arg


def check_d_conditions(
    cs: ConflictSystem, d: float, eps: float, mode: str = "simple", delta: float | None = None
) -> ConditionReport:
    """Simple or mixed boundedness of the D family; mode "both" adds the implication check."""
    if mode not in ("simple", "mixed", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    h = cs.h
    rep = ConditionReport(params={"d": d, "eps": eps, "ell": cs.ell, "mode": mode, "delta": delta})
    st = _d_statistics(cs)
    types = sorted(cs.d_types())
    delta_p = min((_h2_degree(h, x) for x in h.p_vertices()), default=0)
    ell = cs.ell
    max_size = max((len(x) for x in cs.d), default=0)
    min_size = min((len(x) for x in cs.d), default=0)
    min_h2 = min((len(x) for x in cs.d_h2), default=0)
    simple: list[ConditionEntry] = []
    mixed: list[ConditionEntry] = []
    dl = (lambda t: t**4) if delta is None else (lambda t: delta)

    if mode in ("simple", "both") and cs.d:
        S = simple
        S.append(_entry("D1.h2", 2, lambda t: min_h2, eps))
        S.append(_entry("D1.size", max_size, lambda t: ell, eps))
        for t in types:
            j1, j2 = t
            val, arg = _max_of(st["count_x"][t])
            S.append(_entry(f"D2{_tl(t)}", val, lambda e, j1=j1, j2=j2: d ** (j1 + e**4) * delta_p**j2, eps, arg))
            for jp in range(1, j1 + 1):
                val, arg = _max_of(st["count_xF"][t], jp)
                S.append(
                    _entry(f"D3{_tl(t)}[j'={jp}]", val, lambda e, j1=j1, j2=j2, jp=jp: d ** (j1 - jp - e) * delta_p**j2, eps,
                           arg and list(arg[1:]))
                )
            if j2 >= 2:
                val, arg = _max_of(st["count_xy"][t])
                S.append(_entry(f"D4{_tl(t)}", val, lambda e, j1=j1, j2=j2: d ** (j1 - e) * delta_p**j2, eps, arg and list(arg)))

    if mode in ("mixed", "both") and cs.d:
        M = mixed
        M.append(_entry("E1.h2", 1, lambda t: min_h2, eps))
        M.append(_entry("E1.min", 2, lambda t: min_size, eps))
        M.append(_entry("E1.size", max_size, lambda t: ell, eps))
        for t in types:
            j1, j2 = t
            val, arg = _max_of(st["mass_x"][t])
            M.append(_entry(f"E2{_tl(t)}", val, lambda e, j1=j1: d ** (j1 + dl(e)), eps, arg))
            for jp in range(1, j1 + 1):
                val, arg = _max_of(st["mass_xF"][t], jp)
                M.append(_entry(f"E3{_tl(t)}[j'={jp}]", val, lambda e, j1=j1, jp=jp: d ** (j1 - jp - e), eps, arg and list(arg[1:])))
            if j2 >= 2:
                val, arg = _max_of(st["mass_xy"][t])
                M.append(_entry(f"E4{_tl(t)}", val, lambda e, j1=j1: d ** (j1 - e), eps, arg and list(arg)))
            if j2 == 1:
                val, arg = _max_of(st["count_e"][t])
                M.append(_entry(f"E5{_tl(t)}", val, lambda e, j1=j1: ell * d**j1, eps, arg))
                for jp in range(1, j1):
                    val, arg = _max_of(st["count_Fe"][t], jp)
                    M.append(_entry(f"E6{_tl(t)}[j'={jp}]", val, lambda e, j1=j1, jp=jp: d ** (j1 - jp - e), eps,
                                    arg and list(arg[1:])))

    rep.entries.extend(simple)
    rep.entries.extend(mixed)
    if mode == "both":
        s_ok = all(e.holds for e in simple)
        m_ok = all(e.holds for e in mixed)
        rep.entries.append(ConditionEntry("simple=>mixed", (not s_ok) or m_ok, float(s_ok), float(m_ok)))
    return rep


def overlap_system(h: TripartiteHypergraph, ell: int = 2) -> ConflictSystem:
    """The generated overlap pairs as a D-only conflict system."""
    from .conflicts import generate_overlap_conflicts

    return ConflictSystem(h, d=generate_overlap_conflicts(h), ell=max(ell, 2))
