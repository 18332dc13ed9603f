import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfhm.conflicts import ConflictSystem
from cfhm.generators import planted_instance, toy_system
from cfhm.hypergraph import TripartiteHypergraph
from cfhm.stage1 import run_stage1
from cfhm.stage2 import (
    LocalUnsatisfiableError,
    blocked_partition,
    choose_i_star,
    lambda_bound,
    run_stage2,
    safe_edges,
    series_truncation,
)
from cfhm.verify import verify_matching


@pytest.mark.parametrize("ell, expected", [(2, 13), (3, 31), (4, 55)])
def test_i_star_values(ell, expected):
    assert choose_i_star(ell) == expected


def test_i_star_is_the_smallest_odd_choice():
    # one odd step below fails the tolerance at the top of the range
    for ell in (2, 3):
        i = choose_i_star(ell)
        top = ell * ell
        assert abs(series_truncation(top, i - 2) - math.exp(-top)) > lambda_bound(ell)


def test_series_truncation():
    assert series_truncation(0.0, 5) == 1.0
    assert series_truncation(1.0, 1) == 0.0
    assert series_truncation(2.0, 30) == pytest.approx(math.exp(-2), abs=1e-15)


def _stage1_edges(h, rng_seed):
    """Some H1 matching to condition on: greedy in id order, shifted by the seed."""
    ids = list(h.h1_ids)
    if ids:
        k = rng_seed % len(ids)
        ids = ids[k:] + ids[:k]
    used, m1 = set(), []
    for e in ids:
        if not used.intersection(h.edges[e]):
            m1.append(e)
            used.update(h.edges[e])
    return m1


@given(st.integers(0, 10**6), st.sampled_from([1, 3, 5]))
def test_inclusion_exclusion_is_a_lower_bound(seed, i_star):
    h, cs = toy_system(seed, max_p=8, max_choices=10**6)
    m1 = _stage1_edges(h, seed)
    for x in h.p_vertices():
        s = safe_edges(cs, m1, x, 2.0, i_star=i_star)
        assert s.inclusion_exclusion <= len(s.safe)
        if i_star >= max(s.completing.values(), default=0):
            assert s.inclusion_exclusion == len(s.safe)


def test_even_i_star_is_rejected():
    h, cs = toy_system(0)
    with pytest.raises(ValueError):
        safe_edges(cs, [], 0, 2.0, i_star=2)


def _square():
    # x0: a = {R0, R1}, b = {R2, R3};  x1: c = {R0, R4}, d = {R2, R5}
    return TripartiteHypergraph.from_parts(
        (2, 0, 6), (1, 0, 2), h2=[(0, 2, 3), (0, 4, 5), (1, 2, 6), (1, 4, 7)])


def test_unique_assignment_is_found():
    h = _square()
    a, b, c, d = 0, 1, 2, 3
    # overlaps rule out (a, c) and (b, d); the conflict rules out (b, c)
    cs = ConflictSystem(h, d=[(b, c)])
    for seed in range(20):
        m, lg = run_stage2(cs, [], seed)
        assert lg.success
        assert m.m2 == frozenset({a, d})


def test_no_safe_edge_raises():
    h = TripartiteHypergraph.from_parts((3, 0, 2), (2, 0, 1), h1=[(1, 2)], h2=[(0, 3), (0, 4)])
    cs = ConflictSystem(h, d=[(0, 1), (0, 2)])
    with pytest.raises(LocalUnsatisfiableError) as err:
        run_stage2(cs, [0], 0)
    assert err.value.x == 0
    # with one edge still safe, it is the only possible choice
    m, lg = run_stage2(ConflictSystem(h, d=[(0, 1)]), [0], 0)
    assert lg.success and m.m2 == frozenset({2})


def test_cap_is_reported():
    # two anchors with one edge each, meeting in R: the overlap can never be fixed
    h = TripartiteHypergraph.from_parts((2, 0, 2), (1, 0, 1), h2=[(0, 2), (1, 2)])
    m, lg = run_stage2(ConflictSystem(h), [], 0, max_rounds=7)
    assert lg.outcome == "cap-reached"
    assert len(lg.rounds) == 7 and lg.n_rounds == 8
    assert lg.rounds[0]["conflict"] == ["E", 0, 1]


def test_d_violations_are_resampled_first():
    h = _square()
    cs = ConflictSystem(h, d=[(0, 2), (0, 3), (1, 2), (1, 3)])
    _, lg = run_stage2(cs, [], 0, max_rounds=3)
    assert lg.outcome == "cap-reached"
    assert all(r["conflict"][0] == "D" for r in lg.rounds)


@pytest.fixture(scope="module")
def mixed():
    return planted_instance(n=300, d=10, seed=0, c_per_edge=1.0, with_h2=True, h2_degree=6)


@settings(max_examples=10)
@given(st.integers(0, 10**4))
def test_successful_runs_are_conflict_free(mixed, seed):
    r = run_stage1(mixed.h, mixed.cs, mixed.d, mixed.eps, seed, force=True)
    try:
        m, lg = run_stage2(mixed.cs, r.m1, seed)
    except LocalUnsatisfiableError:
        return
    if lg.success:
        rep = verify_matching(mixed.h, m, mixed.cs)
        assert rep.passed, rep.dumps()
        assert lg.diagnostics["probability_within_weight_bound"]


def test_stage2_is_deterministic(mixed):
    r = run_stage1(mixed.h, mixed.cs, mixed.d, mixed.eps, 0, force=True)
    m_a, lg_a = run_stage2(mixed.cs, r.m1, 5)
    m_b, lg_b = run_stage2(mixed.cs, r.m1, 5)
    assert m_a == m_b and lg_a.dumps() == lg_b.dumps()


def test_blocked_partition_splits_family(mixed):
    cs = mixed.cs
    r = run_stage1(mixed.h, cs, mixed.d, mixed.eps, 0, force=True)
    x = max(cs.d_by_x, key=lambda y: len(cs.d_by_x[y]))
    part = blocked_partition(cs, r.m1, x, 1, 2)
    inside = [i for i in cs.family_at(x, 1, 2) if r.m1.issuperset(cs.d_h1[i])]
    assert sorted(part["blocked"] + part["unblocked"]) == sorted(inside)
    with pytest.raises(ValueError):
        blocked_partition(cs, r.m1, x, 1, 1)
