"""Shared machinery for edge colourings built from auxiliary matchings.

A `ColourState` holds a partial colouring of the k-edges of K_n^k, remembers
which auxiliary edge coloured each k-edge, and indexes coloured k-edges by
their (k-1)-subsets so that walks along coloured edges are cheap.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import combinations, permutations
from typing import Callable, Iterator


class ColourState:
    def __init__(self, k: int):
        self.k = k
        self.colour: dict[tuple[int, ...], int] = {}
        self.owner: dict[tuple[int, ...], int] = {}
        self.by_prefix: dict[tuple[int, ...], dict[int, int]] = defaultdict(dict)
        # (prefix, colour) -> completing vertices, for colour-restricted walks
        self.by_colour: dict[tuple[tuple[int, ...], int], set[int]] = defaultdict(set)

    def set(self, edge: tuple[int, ...], colour: int, owner: int) -> None:
        if edge in self.colour:
            self.unset(edge)
        self.colour[edge] = colour
        self.owner[edge] = owner
        for s in combinations(edge, self.k - 1):
            (v,) = set(edge) - set(s)
            self.by_prefix[s][v] = colour
            self.by_colour[(s, colour)].add(v)

    def unset(self, edge: tuple[int, ...]) -> None:
        colour = self.colour.pop(edge, None)
        self.owner.pop(edge, None)
        for s in combinations(edge, self.k - 1):
            (v,) = set(edge) - set(s)
            self.by_prefix[s].pop(v, None)
            if colour is not None:
                self.by_colour[(s, colour)].discard(v)

    def get(self, edge: tuple[int, ...]):
        return self.colour.get(edge)


def _key(vs) -> tuple[int, ...]:
    return tuple(sorted(vs))


def find_tight_cycles(
    state: ColourState,
    start: tuple[int, ...],
    n: int,
    length: int,
    extra: dict[tuple[int, ...], int] | None = None,
    first_only: bool = True,
) -> Iterator[list[int]]:
    """Vertex sequences of tight cycles through `start` with #uncoloured + #colours <= k.

    `extra` overlays tentative colours on the state. Each cycle may be
    reported several times (once per orientation and rotation fixing `start`).
    """
    if state.k == 2 and length == 4 and not extra and start in state.colour:
        for seq in four_cycles_through(state, start, n):
            yield seq
            if first_only:
                return
        return
    yield from walk_tight_cycles(state, start, n, length, extra, first_only)


def walk_tight_cycles(
    state: ColourState,
    start: tuple[int, ...],
    n: int,
    length: int,
    extra: dict[tuple[int, ...], int] | None = None,
    first_only: bool = True,
) -> Iterator[list[int]]:
    """Bounded walk behind `find_tight_cycles`, valid for every k and length."""
    k = state.k
    extra = extra or {}

    def colour_of(edge):
        c = extra.get(edge)
        return c if c is not None else state.colour.get(edge)

    c0 = colour_of(start)
    seq: list[int] = []

    def windows_close(seq) -> list[tuple[int, ...]]:
        return [_key([seq[(i + j) % length] for j in range(k)]) for i in range(length - k + 1, length)]

    def rec(u: int, colours: dict[int, int]) -> Iterator[list[int]]:
        if len(seq) == length:
            uu, cc = u, dict(colours)
            for w in windows_close(seq):
                c = colour_of(w)
                if c is None:
                    uu += 1
                else:
                    cc[c] = cc.get(c, 0) + 1
                if uu + len(cc) > k:
                    return
            yield list(seq)
            return
        prefix = _key(seq[-(k - 1):])
        used = set(seq)
        if u + len(colours) >= k:
            cand = [(v, c) for v, c in state.by_prefix.get(prefix, {}).items() if c in colours and v not in used]
            for v, c in extra_candidates(prefix, colours, used):
                cand.append((v, c))
        else:
            cand = [(v, None) for v in range(n) if v not in used]
        for v, _ in cand:
            w = _key((*seq[-(k - 1):], v))
            c = colour_of(w)
            nu, nc = u, colours
            if c is None:
                nu = u + 1
            else:
                nc = dict(colours)
                nc[c] = nc.get(c, 0) + 1
            if nu + len(nc) > k:
                continue
            seq.append(v)
            yield from rec(nu, nc)
            seq.pop()

    def extra_candidates(prefix, colours, used):
        for edge, c in extra.items():
            if c in colours and set(prefix) <= set(edge):
                (v,) = set(edge) - set(prefix)
                if v not in used and state.colour.get(edge) is None:
                    yield v, c

    for order in permutations(start):
        seq[:] = list(order)
        for found in rec(0 if c0 is not None else 1, {c0: 1} if c0 is not None else {}):
            yield found
            if first_only:
                return


def four_cycles_through(state: ColourState, start: tuple[int, int], n: int) -> Iterator[list[int]]:
    """Graph 4-cycles a-b-x-y through the coloured edge ab with #uncoloured + #colours <= 2.

    Same cycles as the general walk for k = 2, each reported once. With ab
    coloured c0 the options are: one uncoloured edge and the rest c0, or
    every edge coloured from {c0, alpha}. Colour classes are sparse, so the
    per-colour neighbour sets keep each case short.
    """
    a, b = start
    c0 = state.colour[start]
    nbr, by_c = state.by_prefix, state.by_colour
    empty: dict = {}
    at_a, at_b = nbr.get((a,), empty), nbr.get((b,), empty)
    a_c0 = by_c.get(((a,), c0), set())
    for x in range(n):
        if x == a or x == b:
            continue
        cbx = at_b.get(x)
        at_x = nbr.get((x,), empty)
        if cbx is None:
            for y in a_c0:
                if y != b and y != x and at_x.get(y) == c0:
                    yield [a, b, x, y]
        elif cbx == c0:
            for y in range(n):
                if y == a or y == b or y == x:
                    continue
                cxy, cya = at_x.get(y), at_a.get(y)
                if cxy is None:
                    ok = cya == c0
                elif cya is None:
                    ok = cxy == c0
                else:
                    ok = cxy == c0 or cya == c0 or cxy == cya
                if ok:
                    yield [a, b, x, y]
        else:
            for y in a_c0 | by_c.get(((a,), cbx), set()):
                if y != b and y != x and at_x.get(y) in (c0, cbx):
                    yield [a, b, x, y]


def cycle_edges(seq: list[int], k: int) -> list[tuple[int, ...]]:
    m = len(seq)
    return [_key([seq[(i + j) % m] for j in range(k)]) for i in range(m)]


def conflict_of_cycle(state: ColourState, seq: list[int], extra_owner: dict | None = None) -> tuple[int, ...]:
    """Auxiliary edges colouring the repeated-colour part of a coloured cycle."""
    k = state.k
    edges = cycle_edges(seq, k)
    colours = [state.colour.get(e) for e in edges]
    counts: dict = defaultdict(int)
    for c in colours:
        if c is not None:
            counts[c] += 1
    owners = set()
    for e, c in zip(edges, colours):
        if c is not None and counts[c] >= 2:
            owners.add(state.owner[e])
    return tuple(sorted(owners))


def canonical_cycle(seq) -> tuple[int, ...]:
    """Smallest rotation/reflection of a vertex sequence."""
    m = len(seq)
    best = None
    for s in (list(seq), list(reversed(seq))):
        for i in range(m):
            cand = tuple(s[i:] + s[:i])
            if best is None or cand < best:
                best = cand
    return best


def all_tight_cycles(n: int, length: int) -> Iterator[tuple[int, ...]]:
    """Every cyclic vertex sequence of distinct vertices, once per rotation/reflection class."""
    for first in range(n):
        rest = [v for v in range(first + 1, n)]
        for tail in permutations(rest, length - 1):
            if tail[0] < tail[-1]:
                yield (first, *tail)


ColourLookup = Callable[[tuple[int, ...]], object]
