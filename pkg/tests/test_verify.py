import math
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfhm.conflicts import ConflictSystem
from cfhm.generators import toy_system
from cfhm.hypergraph import Matching, TripartiteHypergraph
from cfhm.verify import (
    exact_expectation,
    flagged_pairs_inside,
    mc_unavoidability_oracle,
    tight_cycles_by_edges,
    tight_cycles_by_vertices,
    verify_covering,
    verify_matching,
    verify_ramsey_coloring,
    verify_steiner,
)

FANO = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]


def test_rainbow_colouring_passes():
    n = 7
    col = {e: i for i, e in enumerate(combinations(range(n), 2))}
    rep = verify_ramsey_coloring(n, 2, ("cycle", 4), 3, col, palette=len(col))
    assert rep.passed
    assert rep.counts["copies"] == math.comb(7, 4) * 3
    assert verify_ramsey_coloring(n, 2, "k4", 5, col).passed


def test_monochromatic_colouring_fails_everywhere():
    col = {e: 0 for e in combinations(range(6), 2)}
    rep = verify_ramsey_coloring(6, 2, ("cycle", 4), 3, col)
    assert not rep.passed
    assert rep.counts["violations"] == rep.counts["copies"] == math.comb(6, 4) * 3
    k4 = verify_ramsey_coloring(6, 2, "k4", 5, col)
    assert k4.counts["violations"] == math.comb(6, 4)


def test_palette_check():
    col = {e: i for i, e in enumerate(combinations(range(5), 2))}
    assert not verify_ramsey_coloring(5, 2, ("cycle", 4), 3, col, palette=3).get("palette").passed


def test_partial_colouring_is_rejected():
    with pytest.raises(ValueError, match="uncoloured"):
        verify_ramsey_coloring(5, 2, ("cycle", 4), 3, {(0, 1): 0})


@pytest.mark.parametrize("n, k, length, count", [(8, 2, 4, 210), (7, 3, 5, 21 * 12), (6, 2, 5, 6 * 12)])
def test_cycle_counts_agree(n, k, length, count):
    by_v = sorted(tuple(sorted(es)) for es in tight_cycles_by_vertices(n, k, length))
    by_e = sorted(tuple(es) for es in tight_cycles_by_edges(n, k, length))
    assert len(by_e) == count
    if k == 2:
        assert by_v == by_e
    else:
        assert set(by_v) == set(by_e)


def test_strategies_agree_on_verdict():
    col = {e: (e[0] + e[1]) % 3 for e in combinations(range(7), 2)}
    a = verify_ramsey_coloring(7, 2, ("cycle", 4), 3, col, strategy="vertices")
    b = verify_ramsey_coloring(7, 2, ("cycle", 4), 3, col, strategy="edges")
    assert a.counts == b.counts


def test_covering_checks():
    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    rep = verify_covering(4, edges, [(0, 1)], [0, 2])
    assert rep.passed and rep.fractions["doubly"] == 0
    rep = verify_covering(4, edges, [(0, 1)], [0, 1, 2])
    assert not rep.get("conflict-free").passed
    assert rep.counts["histogram"] == {1: 2, 2: 2}
    rep = verify_covering(4, edges, [], [0])
    assert not rep.get("covers-all").passed
    rep = verify_covering(4, edges, [], [0, 0, 0, 2])
    assert not rep.get("at-most-twice").passed and not rep.get("edge-used-at-most-twice").passed
    assert verify_covering(4, edges, [], [0, 2], eps=0.5, d=2).fractions["doubly-bound"] == 2 ** -(0.5**5)


def test_steiner_checks_on_fano():
    rep = verify_steiner(7, 3, 2, 3, FANO)
    assert rep.passed
    assert rep.counts["histogram"] == {1: 21}
    # the four lines missing a point form a bad 4-configuration
    rep = verify_steiner(7, 3, 2, 4, FANO)
    assert not rep.get("span-packings").passed


def test_steiner_span_all_counts_repeats():
    sets = FANO + [FANO[0]]
    rep = verify_steiner(7, 3, 2, 3, sets)
    assert not rep.get("span-all").passed
    assert rep.get("span-packings").passed
    assert rep.counts["histogram"] == {1: 18, 2: 3}


def test_verify_matching_flags_each_failure():
    h = TripartiteHypergraph.from_parts((4, 0, 2), (2, 0, 1), h1=[(0, 1), (1, 2), (2, 3)], h2=[(3, 4), (0, 5)])
    cs = ConflictSystem(h, d=[(0, 3)])
    ok = verify_matching(h, Matching.build(h, [1], [3, 4]), ConflictSystem(h))
    assert ok.passed
    rep = verify_matching(h, Matching.build(h, [0, 1]), cs)
    assert not rep.get("disjoint").passed and not rep.get("P-perfect").passed
    rep = verify_matching(h, Matching.build(h, [0], [3]), cs)
    assert not rep.get("D-free").passed
    rep = verify_matching(h, Matching.build(h, [3], [0]), cs)
    assert not rep.get("m1-in-H1").passed and not rep.get("m2-in-H2").passed


def test_flagged_pairs_inside():
    assert flagged_pairs_inside([1, 2, 5], {(1, 2): 0, (2, 3): 0, (1, 5): 0}) == [(1, 2), (1, 5)]


def test_mc_trivial_cases():
    h = TripartiteHypergraph.from_parts((2, 0, 2), (1, 0, 1), h2=[(0, 2), (1, 3)])
    assert mc_unavoidability_oracle(h, [], 100, 0) == (0.0, 0.0)
    mean, err = mc_unavoidability_oracle(h, [(0, 1)], 100, 0)
    assert mean == 1.0 and err == 0.0


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_mc_oracle_agrees_with_enumeration(seed):
    h, cs = toy_system(seed, max_p=6, max_choices=5000)
    exact = float(exact_expectation(h, cs.d))
    mean, err = mc_unavoidability_oracle(h, cs.d, 4000, seed)
    assert abs(mean - exact) <= 5 * err + 1e-12
