import math
from collections import Counter
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfhm.applications import build_ramsey_cycles
from cfhm.boundedness import (
    check_c_conditions,
    check_d_conditions,
    check_h_conditions,
    family_unavoidability,
    largest_passing_eps,
    overlap_system,
    unavoidability,
    vertex_unavoidability,
    weighted_max_degree,
)
from cfhm.conflicts import ConflictSystem
from cfhm.generators import planted_instance, toy_system
from cfhm.hypergraph import TripartiteHypergraph
from cfhm.verify import exact_expectation


def _star(degrees):
    """P-vertices with the given H2 degrees, each H2 edge on its own pair of R-vertices."""
    n_p = len(degrees)
    h2, r = [], n_p
    for x, dx in enumerate(degrees):
        for _ in range(dx):
            h2.append((x, r, r + 1))
            r += 2
    h1 = [(0, 1)] if n_p >= 2 else []
    return TripartiteHypergraph.from_parts((n_p, 0, r - n_p), (2, 0, 2), h1=h1, h2=h2)


def test_unavoidability_examples():
    h = _star([5, 2, 2])
    first = {x: h.inc2[x][0] for x in range(3)}
    assert unavoidability(h, [0]) == 1  # only an H1 edge: no randomness
    assert unavoidability(h, [0, first[0]]) == Fraction(1, 5)
    assert unavoidability(h, [first[1], first[2]]) == Fraction(1, 4)
    assert float(unavoidability(h, [first[1], first[2]], exact=False)) == 0.25
    fam = [[first[1], first[2]], [h.inc2[1][1], first[2]]]
    assert family_unavoidability(h, fam) == Fraction(1, 2)


def test_single_h2_choice_is_certain():
    h = _star([1, 0])
    e = h.inc2[0][0]
    assert unavoidability(h, [e]) == 1


@given(st.integers(0, 10**6))
def test_unavoidability_matches_enumeration(seed):
    h, cs = toy_system(seed, max_p=6, max_choices=5000)
    assert family_unavoidability(h, cs.d) == exact_expectation(h, cs.d)


def test_vertex_unavoidability():
    h = TripartiteHypergraph.from_parts((2, 0, 4), (1, 0, 2), h2=[(0, 2, 3), (0, 2, 4), (1, 2, 5)])
    assert vertex_unavoidability(h, 2) == Fraction(2, 2) + Fraction(1, 1)
    assert vertex_unavoidability(h, 5) == 1
    assert vertex_unavoidability(h, 3) == Fraction(1, 2)


@given(st.integers(0, 10**6), st.integers(0, 2), st.integers(0, 2))
def test_weighted_max_degree_brute_force(seed, j1, j2):
    h, cs = toy_system(seed, max_p=6, max_choices=5000)
    best = Fraction(0)
    ones = [e for e in h.h1_ids]
    twos = [e for e in h.h2_ids]
    for c in combinations(ones, j1):
        for dd in combinations(twos, j2):
            mass = sum(
                (unavoidability(h, x) for x in cs.d if set(c) <= set(x) and set(dd) <= set(x)), Fraction(0)
            )
            best = max(best, mass)
    val, _ = weighted_max_degree(h, cs.d, j1, j2)
    assert val == best


def test_largest_passing_eps():
    assert largest_passing_eps(lambda t: t <= 0.3) == pytest.approx(0.3, abs=1e-9)
    assert largest_passing_eps(lambda t: False) is None
    assert largest_passing_eps(lambda t: True) == 1.0


def test_h_conditions_on_ramsey_cycles():
    inst = build_ramsey_cycles(20)
    rep = check_h_conditions(inst.h, inst.d, 0.1)
    assert inst.d == 200
    low = rep.get("H1.lower")
    assert low.holds
    # min P-degree 180 = (1 - d^-eps) d solves to eps = ln(10) / ln(200)
    assert low.sup_eps == pytest.approx(math.log(10) / math.log(200), abs=1e-6)
    assert rep.get("H1.upper").lhs == 180
    assert rep.get("H2.min_degree").holds


def test_h_conditions_fail_on_high_codegree():
    h1 = [(0, 1, 2), (0, 1, 3), (0, 1, 4), (0, 1, 5)]
    h = TripartiteHypergraph.from_parts((6, 0, 0), (3, 0, 0), h1=h1)
    rep = check_h_conditions(h, 4, 0.1)
    assert rep.get("H2").lhs == 4 and not rep.get("H2").holds
    assert rep.get("H2").witness == [0, 1]
    assert not rep.get("nonempty").holds


def test_c_conditions_on_planted_instance():
    inst = planted_instance(n=600, d=20, seed=1, c_per_edge=2.0)
    rep = check_c_conditions(inst.cs, inst.d, inst.eps)
    assert rep.get("C1.min").holds and rep.get("C1.max").holds
    counts = Counter(e for x in inst.cs.c if len(x) == 3 for e in x)
    assert rep.get("C2[j=3]").lhs == max(counts.values())


def test_c_conditions_flag_small_conflicts():
    h = TripartiteHypergraph.from_parts((6, 0, 0), (2, 0, 0), h1=[(0, 1), (2, 3), (4, 5)])
    cs = ConflictSystem(h, c=[(0, 1)])
    rep = check_c_conditions(cs, 2, 0.1)
    assert not rep.get("C1.min").holds


def test_c3_counts_shared_subsets():
    h = TripartiteHypergraph.from_parts((12, 0, 0), (2, 0, 0), h1=[(2 * i, 2 * i + 1) for i in range(6)])
    cs = ConflictSystem(h, c=[(0, 1, 2), (0, 1, 3), (0, 1, 4), (2, 3, 4)])
    rep = check_c_conditions(cs, 2.0, 0.1)
    e = rep.get("C3[j=3,j'=2]")
    assert e.lhs == 3 and e.witness == [0, 1]
    assert not e.holds  # 3 > 2^(0.9)


def test_d_conditions_on_planted_instance():
    inst = planted_instance(n=300, d=20, seed=2, c_per_edge=1.0, with_h2=True)
    rep = check_d_conditions(inst.cs, inst.d, inst.eps, mode="both")
    labels = rep.labels()
    for t in ("(1,1)", "(2,1)", "(0,2)", "(1,2)", "(2,2)", "(0,3)"):
        assert f"E2{t}" in labels
    assert "D2(1,1)" in labels
    # (1,1) conflicts break the simple form, which needs two H2 edges
    assert not rep.get("D1.h2").holds
    assert rep.get("simple=>mixed").holds


def _brute_mass_x(cs, t):
    h = cs.h
    acc = Counter()
    for x in cs.d:
        one = [e for e in x if h.klass[e] == 1]
        two = [e for e in x if h.klass[e] == 2]
        if (len(one), len(two)) != t:
            continue
        a = float(unavoidability(h, x))
        for e in two:
            acc[h.anchor(e)] += a
    return max(acc.values())


@given(st.integers(0, 10**5))
def test_mixed_mass_matches_brute_force(seed):
    h, cs = toy_system(seed, max_p=8, max_choices=10**5)
    rep = check_d_conditions(cs, 4.0, 0.1, mode="mixed")
    for t in cs.d_types():
        assert rep.get(f"E2({t[0]},{t[1]})").lhs == pytest.approx(_brute_mass_x(cs, t), rel=1e-12)


def test_unknown_mode():
    h, cs = toy_system(0)
    with pytest.raises(ValueError):
        check_d_conditions(cs, 2.0, 0.1, mode="odd")


def test_overlap_system_is_simple_pairs():
    h = TripartiteHypergraph.from_parts((3, 0, 5), (1, 0, 2), h2=[(0, 3, 4), (1, 4, 5), (2, 6, 7)])
    cs = overlap_system(h)
    assert cs.d == [(0, 1)]
    assert cs.d_types() == {(0, 2)}
