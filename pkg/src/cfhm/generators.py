"""Random instances: near-regular 3-graphs with planted conflicts, and toy systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conflicts import ConflictSystem
from .hypergraph import H1, H2, TripartiteHypergraph
from .rng import BUILD, make_rng


def regular_edges(n: int, d: int, k: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Union of d uniformly random perfect k-matchings on [n], repeated edges dropped."""
    if n % k:
        raise ValueError("n must be divisible by k")
    seen: set[tuple[int, ...]] = set()
    out = []
    for _ in range(d):
        perm = rng.permutation(n).reshape(-1, k)
        perm.sort(axis=1)
        for row in map(tuple, perm.tolist()):
            if row not in seen:
                seen.add(row)
                out.append(row)
    return out


def _disjoint_sample(pool_size: int, edges, size: int, rng, first: int | None = None, tries: int = 50):
    """Random set of `size` pairwise vertex-disjoint edge ids from range(pool_size)."""
    for _ in range(tries):
        pick = [first] if first is not None else []
        used = set(v for e in pick for v in edges[e])
        ok = True
        while len(pick) < size:
            e = int(rng.integers(pool_size))
            if e in pick or used.intersection(edges[e]):
                ok = False
                break
            pick.append(e)
            used.update(edges[e])
        if ok:
            return tuple(sorted(pick))
    return None


def plant_disjoint_conflicts(edges, count: int, sizes, rng) -> list[tuple[int, ...]]:
    """`count` random sets of pairwise disjoint edges, sizes drawn from `sizes`."""
    out: set[tuple[int, ...]] = set()
    while len(out) < count:
        s = int(rng.choice(sizes))
        c = _disjoint_sample(len(edges), edges, s, rng)
        if c is not None:
            out.add(c)
    return sorted(out)


@dataclass
class PlantedInstance:
    h: TripartiteHypergraph
    cs: ConflictSystem
    d: float
    eps: float


def planted_instance(
    n: int = 3000,
    d: int = 50,
    seed: int = 0,
    c_per_edge: float = 10.0,
    c_sizes=(3, 4),
    with_h2: bool = False,
    h2_degree: int = 8,
    r: int = 2,
    eps: float = 0.1,
) -> PlantedInstance:
    """Random near-d-regular 3-graph on P with planted C conflicts.

    With `with_h2`, adds R with |R| = r|P| and H2 degree `h2_degree` at every
    P-vertex and every R-vertex (each round is a random partition of R into
    r-sets, one per P-vertex), plus planted mixed conflicts of the types
    (1,1), (2,1), (0,2), (1,2), (2,2) and (0,3).
    """
    rng = make_rng(seed, BUILD)
    h1 = regular_edges(n, d, 3, rng)
    m = len(h1)
    c = plant_disjoint_conflicts(h1, int(c_per_edge * m / np.mean(c_sizes)), c_sizes, rng)
    if not with_h2:
        h = TripartiteHypergraph.from_parts((n, 0, 0), (3, 0, 0), h1=h1, validate=False)
        return PlantedInstance(h, ConflictSystem(h, c=c, ell=max(c_sizes)), d, eps)

    n_r = r * n
    h2: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for _ in range(h2_degree):
        while True:
            groups = rng.permutation(n_r).reshape(n, r) + n
            groups.sort(axis=1)
            rows = [(x, *map(int, g)) for x, g in enumerate(groups.tolist())]
            if not seen.intersection(rows):
                break
        seen.update(rows)
        h2.extend(rows)
    h = TripartiteHypergraph.from_parts((n, 0, n_r), (3, 0, r), h1=h1, h2=h2, validate=False)
    d_conf = _plant_mixed(h, h1, m, rng)
    ell = max(max(c_sizes), max(len(x) for x in d_conf))
    return PlantedInstance(h, ConflictSystem(h, c=c, d=d_conf, ell=ell), d, eps)


def _plant_mixed(h: TripartiteHypergraph, h1, m: int, rng) -> list[tuple[int, ...]]:
    out: set[tuple[int, ...]] = set()

    def h1_part(j: int, avoid: set[int]):
        while True:
            part = _disjoint_sample(m, h1, j, rng) if j else ()
            if part is not None and not avoid.intersection(v for e in part for v in h1[e]):
                return part

    def other_h2(anchors: set[int]):
        while True:
            e = h.h2_ids[int(rng.integers(len(h.h2_ids)))]
            if h.anchor(e) not in anchors:
                return e

    for e in h.h2_ids:
        x = h.anchor(e)
        for j1, count in ((1, 6), (2, 10)):
            for _ in range(count):
                out.add(tuple(sorted((*h1_part(j1, {x}), e))))
    for x in h.p_vertices():
        at_x = h.inc2[x]
        for (j1, j2), count in (((0, 2), 2), ((1, 2), 4), ((2, 2), 4), ((0, 3), 1)):
            for _ in range(count):
                e = at_x[int(rng.integers(len(at_x)))]
                anchors = {x}
                two = [e]
                while len(two) < j2:
                    f = other_h2(anchors)
                    anchors.add(h.anchor(f))
                    two.append(f)
                out.add(tuple(sorted((*h1_part(j1, anchors), *two))))
    return sorted(out)


def toy_system(seed: int, max_p: int = 12, max_h2: int = 40, max_conflicts: int = 20, max_choices: int = 200_000):
    """Small random system for checking unavoidability against enumeration.

    Conflicts never use two H2 edges at the same anchor, since such a pair can
    never be selected together.
    """
    rng = make_rng(seed, BUILD)
    while True:
        n_p = int(rng.integers(2, max_p + 1))
        degs = rng.integers(1, 5, size=n_p)
        if degs.sum() <= max_h2 and np.prod(degs.astype(float)) <= max_choices:
            break
    r = 2
    n_r = 2 * n_p + 2
    h2 = []
    for x, dx in enumerate(degs.tolist()):
        seen = set()
        while len(seen) < dx:
            pair = tuple(sorted(int(v) + n_p for v in rng.choice(n_r, size=r, replace=False)))
            seen.add(pair)
        h2.extend((x, *p) for p in sorted(seen))
    h1 = sorted({tuple(sorted(map(int, rng.choice(n_p, size=2, replace=False)))) for _ in range(n_p)}) if n_p >= 2 else []
    h = TripartiteHypergraph.from_parts((n_p, 0, n_r), (2, 0, r), h1=h1, h2=h2)
    conflicts: set[tuple[int, ...]] = set()
    n_conf = int(rng.integers(1, max_conflicts + 1))
    for _ in range(50 * n_conf):
        if len(conflicts) >= n_conf:
            break
        j2 = int(rng.integers(1, min(3, n_p) + 1))
        anchors = rng.choice(n_p, size=j2, replace=False)
        two = [h.inc2[int(y)][int(rng.integers(len(h.inc2[int(y)])))] for y in anchors]
        j1 = int(rng.integers(0, min(2, len(h.h1_ids)) + 1))
        one = [h.h1_ids[int(i)] for i in rng.choice(len(h.h1_ids), size=j1, replace=False)] if j1 else []
        conflict = tuple(sorted(two + one))
        if len(conflict) >= 2:
            conflicts.add(conflict)
    return h, ConflictSystem(h, d=sorted(conflicts), ell=max(len(c) for c in conflicts) if conflicts else 2)
