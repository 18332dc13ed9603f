"""Stage 2: cover the P-vertices left by stage 1 with H2 edges.

Every uncovered vertex x picks a uniform edge from its safe set N_x^s, the H2
edges at x that complete no single-H2 conflict together with stage-1 edges.
Conflicts with two or more H2 edges, and H2 pairs meeting inside R, are then
removed by resampling: while some bad event holds, take the smallest one and
redraw the H2 edges at its anchors.
"""
from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable

import mpmath

from .boundedness import unavoidability
from .conflicts import ConflictSystem
from .hypergraph import H2, Matching
from .rng import STAGE2, make_rng, uniform_index

log = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 10_000


class LocalUnsatisfiableError(RuntimeError):
    """Some uncovered vertex has no safe H2 edge."""

    def __init__(self, x: int):
        super().__init__(f"P-vertex {x} has no safe H2 edge")
        self.x = x


def series_truncation(x: float, i_star: int) -> float:
    """Sum of (-x)^m / m! for m = 0..i_star."""
    term, total = 1.0, 1.0
    for m in range(1, i_star + 1):
        term *= -x / m
        total += term
    return total


def lambda_bound(ell: int) -> float:
    return math.exp(-(ell**2)) / 3


def _series_error(x, i: int):
    term = total = mpmath.mpf(1)
    for m in range(1, i + 1):
        term *= -x / m
        total += term
    return abs(total - mpmath.e ** (-x))


@lru_cache(maxsize=None)
def choose_i_star(ell: int, grid: int = 2000) -> int:
    """Smallest odd i* whose truncated series is within e^{-ell^2}/3 of e^{-x} on [0, ell^2].

    The error is checked on a grid; between grid points it moves by at most
    step * ell^(2 i*) / i*!, which is added before comparing.
    """
    with mpmath.workdps(40):
        top = mpmath.mpf(ell * ell)
        target = mpmath.e ** (-top) / 3
        i = 1
        while True:
            if _series_error(top, i) <= target:
                slack = top / grid * top**i / mpmath.factorial(i)
                worst = max(_series_error(top * t / grid, i) for t in range(grid + 1))
                if worst + slack <= target:
                    return i
            i += 2


@dataclass
class SafeEdges:
    x: int
    edges: list[int]
    safe: list[int]
    completing: dict[int, int]
    gamma: dict[int, list[float]]
    a: list[int]
    i_star: int
    inclusion_exclusion: int

    def to_json(self) -> dict:
        return {
            "x": self.x,
            "d_x": len(self.edges),
            "safe": len(self.safe),
            "a": self.a,
            "i_star": self.i_star,
            "inclusion_exclusion": self.inclusion_exclusion,
            "max_gamma": max((sum(g) for g in self.gamma.values()), default=0.0),
        }


def safe_edges(cs: ConflictSystem, m1: Iterable[int], x: int, d: float, i_star: int | None = None) -> SafeEdges:
    """Safe H2 edges at x with the inclusion-exclusion count and the gamma loads."""
    i_star = choose_i_star(cs.ell) if i_star is None else i_star
    if i_star % 2 == 0:
        raise ValueError("i_star must be odd for a lower bound")
    m1 = frozenset(m1)
    at_x = list(cs.h.inc2[x])
    completing: dict[int, int] = {}
    gamma: dict[int, list[float]] = {}
    for e in at_x:
        per_j = [0] * (cs.ell + 1)
        n_e = 0
        for i in cs.d_by_edge.get(e, ()):
            if len(cs.d_h2[i]) != 1:
                continue
            part = cs.d_h1[i]
            per_j[len(part)] += 1
            if m1.issuperset(part):
                n_e += 1
        completing[e] = n_e
        gamma[e] = [per_j[j] / d**j for j in range(1, cs.ell + 1)]
    a = [sum(comb(n, m) for n in completing.values()) for m in range(1, i_star + 1)]
    ie = len(at_x) + sum((-1) ** m * a[m - 1] for m in range(1, i_star + 1))
    safe = [e for e in at_x if completing[e] == 0]
    return SafeEdges(x, at_x, safe, completing, gamma, a, i_star, ie)


def blocked_partition(cs: ConflictSystem, m1: Iterable[int], x: int, j1: int, j2: int) -> dict:
    """Split the (j1, j2) conflicts at x with H1-part inside m1 by whether another anchor is covered."""
    if j2 < 2:
        raise ValueError("blocking needs at least two H2 edges")
    h = cs.h
    m1 = frozenset(m1)
    covered = {v for e in m1 for v in h.edges[e] if v < h.n_p}
    blocked, unblocked = [], []
    for i in cs.family_at(x, j1, j2):
        if not m1.issuperset(cs.d_h1[i]):
            continue
        (blocked if any(y in covered for y in cs.d_vp[i]) else unblocked).append(i)
    return {
        "blocked": blocked,
        "unblocked": unblocked,
        "mass_blocked": sum((unavoidability(h, cs.d[i]) for i in blocked), 0),
        "mass_unblocked": sum((unavoidability(h, cs.d[i]) for i in unblocked), 0),
    }


@dataclass
class ResampleLog:
    outcome: str
    cap: int
    initial: dict[int, int]
    rounds: list[dict] = field(default_factory=list)
    safe_sizes: dict[int, int] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    @property
    def n_rounds(self) -> int:
        """Sampling passes: the initial draw plus each resampling."""
        return 1 + len(self.rounds)

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "cap": self.cap,
            "n_rounds": self.n_rounds,
            "initial": {str(k): v for k, v in sorted(self.initial.items())},
            "safe_sizes": {str(k): v for k, v in sorted(self.safe_sizes.items())},
            "rounds": self.rounds,
            "diagnostics": self.diagnostics,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _key_json(key) -> list:
    return [key[0], *[list(k) if isinstance(k, tuple) else k for k in key[1:]]]


def run_stage2(
    cs,
    m1: Iterable[int],
    seed: int,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    d: float | None = None,
    i_star: int | None = None,
    diagnostics: bool = True,
) -> tuple[Matching, ResampleLog]:
    """Extend m1 by H2 edges covering every uncovered P-vertex.

    Raises LocalUnsatisfiableError when some vertex has no safe edge. When
    the round cap is hit the returned log has outcome "cap-reached" and the
    matching still contains violated conflicts.
    """
    h = cs.h
    m1 = frozenset(m1)
    base = Matching.build(h, m1)
    todo = sorted(base.uncovered)
    guard = cs.d_guard(m1)
    safe: dict[int, list[int]] = {}
    for x in todo:
        ok = [e for e in h.inc2[x] if not guard.unsafe(e)]
        if not ok:
            raise LocalUnsatisfiableError(x)
        safe[x] = ok

    rng = make_rng(seed, STAGE2)
    choice: dict[int, int] = {}
    occupied: dict[int, set[int]] = defaultdict(set)
    violations: dict[tuple, tuple[int, ...]] = {}
    by_edge: dict[int, set[tuple]] = defaultdict(set)
    r_off = h.r_offset

    def record(key, edges) -> None:
        if key in violations:
            return
        violations[key] = edges
        for f in edges:
            if h.klass[f] == H2:
                by_edge[f].add(key)

    def place(e: int) -> None:
        guard.place(e)
        for v in h.edges[e]:
            if v >= r_off:
                occupied[v].add(e)

    def detect(e: int) -> None:
        for v in h.edges[e]:
            if v >= r_off:
                for f in occupied[v]:
                    if f != e:
                        record(("E", min(e, f), max(e, f)), (min(e, f), max(e, f)))
        for key, edges in guard.violations_at(e):
            record(key, tuple(edges))

    def displace(e: int) -> None:
        guard.displace(e)
        for v in h.edges[e]:
            if v >= r_off:
                occupied[v].discard(e)
        for key in list(by_edge.pop(e, ())):
            edges = violations.pop(key, None)
            if edges is None:
                continue
            for f in edges:
                if f != e and h.klass[f] == H2:
                    by_edge[f].discard(key)

    for x in todo:
        choice[x] = safe[x][uniform_index(rng, len(safe[x]))]
    initial = dict(choice)
    for x in todo:
        place(choice[x])
    for x in todo:
        detect(choice[x])

    lg = ResampleLog("success", max_rounds, initial, safe_sizes={x: len(s) for x, s in safe.items()})
    while violations:
        if len(lg.rounds) >= max_rounds:
            lg.outcome = "cap-reached"
            break
        key = min(violations)
        edges = violations[key]
        anchors = sorted({h.anchor(f) for f in edges if h.klass[f] == H2})
        for y in anchors:
            displace(choice[y])
        for y in anchors:
            choice[y] = safe[y][uniform_index(rng, len(safe[y]))]
            place(choice[y])
        for y in anchors:
            detect(choice[y])
        lg.rounds.append({"conflict": _key_json(key), "vertices": anchors, "edges": [choice[y] for y in anchors]})

    if diagnostics and getattr(cs, "explicit", False):
        lg.diagnostics = _lll_diagnostics(cs, m1, safe)
    log.info("stage 2 seed=%s uncovered=%d rounds=%d outcome=%s", seed, len(todo), len(lg.rounds), lg.outcome)
    return Matching(m1, frozenset(choice.values()), base.uncovered), lg


def _lll_diagnostics(cs: ConflictSystem, m1: frozenset[int], safe: dict[int, list[int]]) -> dict:
    """Bad-event probabilities under the uniform safe choice, and their neighbourhood sums."""
    h = cs.h
    safe_sets = {x: set(s) for x, s in safe.items()}
    events: list[tuple[tuple[int, ...], float, float | None, int]] = []
    for i, conflict in enumerate(cs.d):
        two = cs.d_h2[i]
        if len(two) < 2 or not m1.issuperset(cs.d_h1[i]):
            continue
        if all(h.anchor(e) in safe_sets and e in safe_sets[h.anchor(e)] for e in two):
            anchors = cs.d_vp[i]
            p = math.prod(1 / len(safe[y]) for y in anchors)
            a = math.prod(1 / len(h.inc2[y]) for y in anchors)
            events.append((anchors, p, a, len(two)))
    for v in h.r_vertices():
        at = [e for e in h.inc2[v] if h.anchor(e) in safe_sets and e in safe_sets[h.anchor(e)]]
        for j, e in enumerate(at):
            for f in at[j + 1:]:
                x, y = h.anchor(e), h.anchor(f)
                if x != y:
                    events.append(((min(x, y), max(x, y)), 1 / (len(safe[x]) * len(safe[y])), None, 2))
    per_vertex: dict[int, float] = defaultdict(float)
    for anchors, p, _, _ in events:
        for y in anchors:
            per_vertex[y] += p
    lam = lambda_bound(cs.ell)
    max_p = max((p for _, p, _, _ in events), default=0.0)
    nb = max((sum(per_vertex[y] for y in anchors) for anchors, _, _, _ in events), default=0.0)
    within = all(a is None or p <= lam**-j2 * a * (1 + 1e-12) for _, p, a, j2 in events)
    return {
        "events": len(events),
        "max_probability": max_p,
        "max_neighbourhood_mass": nb,
        "local_lemma_quarter": bool(max_p <= 0.25 and nb <= 0.5),
        "probability_within_weight_bound": within,
    }
