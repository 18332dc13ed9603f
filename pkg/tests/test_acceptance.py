"""Acceptance runs at desk scale, one test per criterion.

Each test prints a `criterion N: PASS|FAIL ...` line and the terminal summary
repeats them. Criteria that cannot be met at this scale run at their full
thresholds and are marked as expected failures; the reasons are in the
decisions ledger.
"""
import json
import math
import time
from fractions import Fraction
from itertools import combinations

import pytest
from conftest import record

from cfhm.applications import build_covering, build_ramsey_cycles, build_steiner
from cfhm.applications.covering import decode_covering, girth_conflicts
from cfhm.applications.ramsey_cycles import decode_colouring
from cfhm.applications.steiner import bad_configurations, span_bound
from cfhm.boundedness import check_c_conditions, check_d_conditions, check_h_conditions, unavoidability
from cfhm.generators import planted_instance, regular_edges, toy_system
from cfhm.hypergraph import H1
from cfhm.pipeline import matching_to_json, run_pipeline, verify_outputs
from cfhm.rng import BUILD, make_rng
from cfhm.stage1 import run_stage1
from cfhm.stage2 import LocalUnsatisfiableError, run_stage2, safe_edges
from cfhm.verify import (
    exact_expectation,
    flagged_pairs_inside,
    mc_unavoidability_oracle,
    verify_covering,
    verify_matching,
    verify_ramsey_coloring,
)

pytestmark = pytest.mark.slow

SEEDS = range(100)


def _dump(obj) -> bytes:
    return json.dumps(obj, sort_keys=True).encode()


# shared suites

@pytest.fixture(scope="module")
def planted():
    return planted_instance(n=3000, d=50, seed=0)


@pytest.fixture(scope="module")
def mixed():
    inst = planted_instance(n=3000, d=50, seed=0, with_h2=True, h2_degree=8)
    return inst


def _mixed_run(inst, seed):
    r = run_stage1(inst.h, inst.cs, inst.d, inst.eps, seed)
    try:
        m, lg = run_stage2(inst.cs, r.m1, seed, d=inst.d)
    except LocalUnsatisfiableError as err:
        return r, None, None, err.x
    return r, m, lg, None


@pytest.fixture(scope="module")
def mixed_runs(mixed):
    return {seed: _mixed_run(mixed, seed) for seed in SEEDS}


@pytest.fixture(scope="module")
def covering_inst():
    rng = make_rng(0, BUILD)
    n = 1500
    edges = regular_edges(n, 40, 3, rng)
    conflicts = girth_conflicts(n, edges, 4 * len(edges), (3, 4), rng)
    return build_covering(n, edges, conflicts)


@pytest.fixture(scope="module")
def steiner12():
    return build_steiner(12, 3, 2, ell=4)


# 1. unavoidability against enumeration and sampling

def test_criterion_1_unavoidability_oracles():
    start = time.perf_counter()
    exact_ok = mc_ok = 0
    worst = 0.0
    for seed in range(50):
        h, cs = toy_system(seed, max_p=12, max_h2=40, max_conflicts=20)
        assert h.n_p <= 12 and len(h.h2_ids) <= 40 and len(cs.d) <= 20
        a = sum((unavoidability(h, x, exact=True) for x in cs.d), Fraction(0))
        exact = exact_expectation(h, cs.d)
        exact_ok += a == exact
        mean, err = mc_unavoidability_oracle(h, cs.d, 10**5, seed)
        z = abs(mean - float(exact)) / err if err else (0.0 if mean == float(exact) else math.inf)
        worst = max(worst, z)
        mc_ok += z <= 5
    elapsed = time.perf_counter() - start
    passed = exact_ok == 50 and mc_ok == 50 and elapsed < 30
    record(1, passed, f"exact {exact_ok}/50, MC within 5 s.e. {mc_ok}/50 (worst {worst:.2f}), {elapsed:.1f}s")
    assert passed


# 2. stage-1 soundness

def test_criterion_2_stage1_soundness(planted):
    h, cs = planted.h, planted.cs
    c_rep = check_c_conditions(cs, planted.d, planted.eps)
    assert c_rep.holds, c_rep.dumps()
    start = time.perf_counter()
    flagged = cs.sharing_pairs(planted.d, planted.eps / 2)
    sound = small = 0
    fractions = []
    for seed in SEEDS:
        r = run_stage1(h, cs, planted.d, planted.eps, seed)
        m1 = r.m1
        used = [v for e in m1 for v in h.edges[e]]
        ok = len(used) == len(set(used)) and all(h.klass[e] == H1 for e in m1)
        ok = ok and not any(m1.issuperset(x) for x in cs.c)
        ok = ok and not flagged_pairs_inside(m1, flagged)
        sound += ok
        frac = r.uncovered_fraction(h.n_p)
        fractions.append(frac)
        small += frac <= 0.15
    elapsed = time.perf_counter() - start
    passed = sound == 100 and small >= 95 and elapsed < 120
    record(2, passed, f"sound {sound}/100, uncovered<=0.15 in {small}/100 (max {max(fractions):.3f}), {elapsed:.1f}s")
    assert passed


# 3. stage-2 completeness

def test_criterion_3_stage2_completeness(mixed, mixed_runs):
    h_rep = check_h_conditions(mixed.h, mixed.d, mixed.eps)
    for label in ("H1.lower", "H1.upper", "H2", "H2.min_degree", "H3'", "H4'"):
        assert h_rep.get(label).holds, label
    assert check_c_conditions(mixed.cs, mixed.d, mixed.eps).holds
    e_rep = check_d_conditions(mixed.cs, mixed.d, mixed.eps, mode="mixed")
    assert e_rep.holds, e_rep.dumps()
    successes = verified = 0
    for seed, (_, m, lg, _) in mixed_runs.items():
        if lg is None or not lg.success:
            continue
        successes += 1
        verified += verify_matching(mixed.h, m, mixed.cs).passed
    rounds = max(lg.n_rounds for _, _, lg, _ in mixed_runs.values() if lg is not None and lg.success)
    passed = successes >= 95 and verified == successes
    record(3, passed, f"success {successes}/100 within 10^4 rounds (max {rounds}), verified {verified}/{successes}")
    assert passed


# 4. Ramsey colourings of tight 4-cycles

RAMSEY_REASON = (
    "at n <= 32 the greedy stage leaves most pairs uncoloured, and the leftover graph has "
    "degree above the t2 reserve colours, so stage 2 cannot finish"
)


@pytest.mark.xfail(strict=False, reason=RAMSEY_REASON)
@pytest.mark.parametrize("n", [16, 24, 32])
def test_criterion_4_ramsey_cycles(n):
    start = time.perf_counter()
    inst = build_ramsey_cycles(n, k=2, cycle_len=4)
    palette = n // 2 + round(n**0.75)
    assert inst.meta["palette"] == palette
    good = 0
    notes = []
    for seed in range(10):
        m, stats, lg = run_pipeline(inst, seed)
        col = decode_colouring(inst, m)
        total = len(col) == math.comb(n, 2)
        if not total:
            notes.append("partial")
            continue
        rep = verify_ramsey_coloring(n, 2, ("cycle", 4), 3, col, palette=palette)
        ok = lg.success and rep.passed
        good += ok
        notes.append(str(rep.counts["violations"]))
    elapsed = time.perf_counter() - start
    passed = good >= 8 and elapsed < 300
    record(4, passed, f"n={n}: {good}/10 seeds good, bad 4-cycles per seed [{' '.join(notes)}], {elapsed:.0f}s")
    assert passed


# 5. coverings with girth conflicts

COVERING_REASON = (
    "the doubly covered fraction equals twice the stage-1 uncovered fraction, which sits "
    "around 0.1 at d = 40, so about half the seeds land above 0.2"
)


@pytest.mark.xfail(strict=False, reason=COVERING_REASON)
def test_criterion_5_covering(covering_inst):
    inst = covering_inst
    n = inst.h.n_p
    edges = [tuple(e) for e in inst.meta["edges"]]
    good = 0
    fracs = []
    for seed in range(10):
        m, stats, lg = run_pipeline(inst, seed)
        rep = verify_covering(n, edges, inst.conflicts.source, decode_covering(inst, m))
        frac = rep.fractions["doubly"]
        fracs.append(f"{frac:.3f}")
        good += rep.passed and frac <= 0.2
    passed = good == 10
    record(5, passed, f"{good}/10 outputs pass (doubly covered fractions {' '.join(fracs)})")
    assert passed


# 6. Steiner configurations and the span condition

def _canonical_bad(s, t, j):
    """Packings of j triples inside [w] spanning at most w points, with no smaller bad part."""
    w = span_bound(s, t, j)
    triples = list(combinations(range(w), s))
    out = []
    for group in combinations(triples, j):
        sets = [set(g) for g in group]
        if any(len(a & b) >= t for a, b in combinations(sets, 2)):
            continue
        if len(set().union(*sets)) > w:
            continue
        smaller = any(
            len(set().union(*sub)) <= span_bound(s, t, i)
            for i in range(2, j) for sub in combinations(sets, i)
        )
        if not smaller:
            out.append(group)
    return out


def exhaustive_bad(m, s, t, j):
    """Every bad configuration lies inside some span_bound-sized point set; relabel the canonical ones."""
    w = span_bound(s, t, j)
    canon = _canonical_bad(s, t, j)
    found = set()
    for pts in combinations(range(m), w):
        for group in canon:
            found.add(frozenset(tuple(sorted(pts[x] for x in S)) for S in group))
    return found


def test_criterion_6a_steiner_enumeration():
    kappa = list(combinations(range(12), 3))
    configs = bad_configurations(kappa, 3, 2, 4)
    ok = True
    sizes = []
    for j in (3, 4):
        mine = {frozenset(kappa[i] for i in conf) for conf in configs[j]}
        oracle = exhaustive_bad(12, 3, 2, j)
        ok = ok and mine == oracle and len(mine) == len(configs[j])
        sizes.append(f"j={j}: {len(mine)} vs {len(oracle)}")
    record(6, ok, "enumeration " + ", ".join(sizes))
    assert ok


STEINER_REASON = (
    "at m = 12 stage 2 hits the resampling cap, so outputs contain bad configurations; the "
    "literal span condition also fails whenever a pair is covered twice"
)


@pytest.mark.xfail(strict=False, reason=STEINER_REASON)
def test_criterion_6b_span_on_pipeline_outputs(steiner12):
    inst = steiner12
    lines = []
    ok = True
    for seed in range(3):
        m, stats, lg = run_pipeline(inst, seed)
        rep = verify_outputs(inst, m)["steiner"]
        span_all = rep.get("span-all").passed
        packings = rep.get("span-packings").passed
        ok = ok and span_all
        lines.append(f"seed {seed} {lg.outcome} span-all={span_all} span-packings={packings}")
    record(6, ok, "span: " + "; ".join(lines))
    assert ok


# 7. safe-edge analytics

def test_criterion_7_safe_edge_analytics(mixed, mixed_runs):
    cs = mixed.cs
    e_rep = check_d_conditions(cs, mixed.d, mixed.eps, mode="mixed")
    e5 = all(e.holds for e in e_rep.entries if e.label.startswith("E5"))
    checked = bonferroni = 0
    worst_gamma = 0.0
    for seed, (r, _, _, _) in mixed_runs.items():
        for x in sorted(r.matching.uncovered):
            s = safe_edges(cs, r.m1, x, mixed.d)
            checked += 1
            bonferroni += s.i_star % 2 == 1 and s.inclusion_exclusion <= len(s.safe)
            worst_gamma = max([worst_gamma, *(g for gs in s.gamma.values() for g in gs)])
    toy_checked = toy_ok = 0
    for seed in range(50):
        h, tcs = toy_system(seed)
        m1 = run_stage1(h, tcs, 2.0, 0.1, seed, force=True).m1
        try:
            run_stage2(tcs, m1, seed, max_rounds=100)
        except LocalUnsatisfiableError:
            pass
        for x in sorted(set(h.p_vertices()) - {v for e in m1 for v in h.edges[e]}):
            s = safe_edges(tcs, m1, x, 2.0)
            toy_checked += 1
            toy_ok += s.inclusion_exclusion <= len(s.safe)
    gamma_ok = (not e5) or worst_gamma <= cs.ell
    passed = bonferroni == checked and toy_ok == toy_checked and gamma_ok
    record(7, passed, f"lower bound {bonferroni}/{checked} planted + {toy_ok}/{toy_checked} toy, "
                      f"E5 {'holds' if e5 else 'fails'}, max gamma {worst_gamma:.4f} <= ell={cs.ell}")
    assert passed


# 8. determinism

def _pipeline_bytes(inst, seed):
    m, stats, lg = run_pipeline(inst, seed)
    reports = {k: r.to_json() for k, r in verify_outputs(inst, m).items()}
    return _dump(matching_to_json(m)), _dump(stats), lg.dumps().encode(), _dump(reports)


def _mixed_bytes(inst, seed):
    r, m, lg, _ = _mixed_run(inst, seed)
    return (_dump(matching_to_json(m)), _dump(r.stats(inst.h)), lg.dumps().encode(),
            verify_matching(inst.h, m, inst.cs).dumps().encode())


def test_criterion_8_determinism(planted, mixed, covering_inst, steiner12):
    again = planted_instance(n=3000, d=50, seed=0)
    same_build = again.h.edges == planted.h.edges and again.cs.c == planted.cs.c
    same = {
        "planted": _mixed_bytes(mixed, 7) == _mixed_bytes(mixed, 7),
        "ramsey": _pipeline_bytes(build_ramsey_cycles(16), 0) == _pipeline_bytes(build_ramsey_cycles(16), 0),
        "covering": _pipeline_bytes(covering_inst, 1) == _pipeline_bytes(covering_inst, 1),
        "steiner": _pipeline_bytes(steiner12, 0) == _pipeline_bytes(steiner12, 0),
    }
    passed = same_build and all(same.values())
    record(8, passed, f"rebuild identical={same_build}, " + ", ".join(f"{k}={v}" for k, v in same.items()))
    assert passed
