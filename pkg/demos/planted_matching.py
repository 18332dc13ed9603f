"""Two-stage matching on a planted instance.

Builds a near-regular 3-graph with planted C conflicts and mixed D conflicts,
checks the boundedness conditions, runs both stages and verifies the result.
"""
from cfhm.boundedness import check_c_conditions, check_d_conditions
from cfhm.generators import planted_instance
from cfhm.stage1 import run_stage1
from cfhm.stage2 import run_stage2
from cfhm.verify import verify_matching


def main(n: int = 1200, d: int = 30, seed: int = 0) -> None:
    inst = planted_instance(n=n, d=d, seed=seed, c_per_edge=3.0, with_h2=True, h2_degree=6)
    h, cs = inst.h, inst.cs
    print(f"instance: {h}")
    print(f"conflicts: {len(cs.c)} in H1 alone, {len(cs.d)} mixed")

    c_rep = check_c_conditions(cs, inst.d, inst.eps)
    d_rep = check_d_conditions(cs, inst.d, inst.eps, mode="mixed")
    print(f"C conditions hold: {c_rep.holds}; mixed D conditions hold: {d_rep.holds}")

    r = run_stage1(h, cs, inst.d, inst.eps, seed)
    print(f"stage 1 picked {len(r.m1)} edges and left {r.uncovered_fraction(h.n_p):.1%} of P uncovered")

    m, lg = run_stage2(cs, r.m1, seed, d=inst.d)
    print(f"stage 2: {lg.outcome} after {lg.n_rounds} sampling passes, {len(m.m2)} H2 edges")

    rep = verify_matching(h, m, cs)
    for check in rep.checks:
        print(f"  {check.name:<10} {'ok' if check.passed else 'FAILED'}  {check.detail}")


if __name__ == "__main__":
    main()
