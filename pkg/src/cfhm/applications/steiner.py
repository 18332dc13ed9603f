"""Partial Steiner systems with high girth through the covering reduction.

The ground hypergraph has the t-subsets of [m] as vertices and one edge per
candidate s-set S (the t-subsets of S). A matching is a packing of s-sets
that pairwise share fewer than t points. A bad j-configuration is such a
packing of j sets whose union has at most (s - t) j + t points; conflicts are
the minimal ones with 3 <= j <= ell.
"""
from __future__ import annotations

import math
from collections import defaultdict
from itertools import combinations
from typing import Sequence

from . import Instance
from .covering import build_covering


def span_bound(s: int, t: int, j: int) -> int:
    return (s - t) * j + t


def bad_configurations(kappa: Sequence[Sequence[int]], s: int, t: int, ell: int) -> dict[int, list[tuple[int, ...]]]:
    """Minimal bad j-configurations among the candidate sets, keyed by j (2 <= j <= ell).

    A disconnected bad configuration always contains a smaller bad one, so
    only connected ones are grown: start from the lowest-index set and keep
    adding a set that meets the current union and adds few enough points.
    """
    masks = [sum(1 << x for x in S) for S in kappa]
    by_point: dict[int, list[int]] = defaultdict(list)
    for i, S in enumerate(kappa):
        for x in S:
            by_point[x].append(i)
    limit = span_bound(s, t, ell)
    bad: dict[int, set[tuple[int, ...]]] = defaultdict(set)
    visited: set[tuple[int, ...]] = set()

    def grow(chosen: list[int], union: int) -> None:
        key = tuple(sorted(chosen))
        if key in visited:
            return
        visited.add(key)
        j = len(chosen)
        if j >= 2 and union.bit_count() <= span_bound(s, t, j):
            # every extension contains this one, so none is minimal
            bad[j].add(key)
            return
        if j == ell:
            return
        first = chosen[0]
        points = [x for x in range(union.bit_length()) if union >> x & 1]
        cands = {i for x in points for i in by_point[x] if i > first}
        for i in sorted(cands.difference(chosen)):
            S = masks[i]
            if (union | S).bit_count() > limit:
                continue
            if any((S & masks[c]).bit_count() >= t for c in chosen):
                continue
            grow(chosen + [i], union | S)

    for i in range(len(masks)):
        grow([i], masks[i])
    minimal: dict[int, list[tuple[int, ...]]] = {}
    smaller: list[frozenset] = []
    for j in range(2, ell + 1):
        keep = []
        for conf in sorted(bad.get(j, ())):
            fc = frozenset(conf)
            if not any(b <= fc for b in smaller):
                keep.append(conf)
        minimal[j] = keep
        smaller.extend(frozenset(c) for c in keep)
    return minimal


def build_steiner(
    m: int, s: int = 3, t: int = 2, kappa: Sequence[Sequence[int]] | None = None, ell: int = 4,
) -> Instance:
    """Covering instance whose conflicts are the minimal bad 3..ell configurations."""
    if not 1 <= t < s <= m:
        raise ValueError("need 1 <= t < s <= m")
    if ell < 3:
        raise ValueError("ell must be at least 3")
    kappa = [tuple(sorted(S)) for S in (kappa if kappa is not None else combinations(range(m), s))]
    tsets = list(combinations(range(m), t))
    tid = {T: i for i, T in enumerate(tsets)}
    covered = set()
    for S in kappa:
        if len(S) != s or len(set(S)) != s or not all(0 <= x < m for x in S):
            raise ValueError(f"candidate {S} is not an s-subset of [m]")
        covered.update(combinations(S, t))
    missing = [T for T in tsets if T not in covered]
    if missing:
        raise ValueError(f"t-set {missing[0]} lies in no candidate")
    edges = [tuple(tid[T] for T in combinations(S, t)) for S in kappa]
    configs = bad_configurations(kappa, s, t, ell)
    conflicts = [c for j in range(3, ell + 1) for c in configs.get(j, [])]
    inst = build_covering(len(tsets), edges, conflicts, ell=ell)
    inst.meta.update({
        "app": "steiner", "m": m, "s": s, "t": t, "ell": ell, "kappa": [list(S) for S in kappa],
        "configs": {j: len(v) for j, v in configs.items()},
        "tsets": math.comb(m, t),
    })
    return inst


def decode_steiner(inst: Instance, matching) -> list[tuple[int, ...]]:
    """Chosen s-sets, one entry per auxiliary edge (an s-set may repeat)."""
    under = inst.conflicts.underlying
    kappa = inst.meta["kappa"]
    return sorted(tuple(kappa[under[e]]) for e in matching.m1 | matching.m2)
