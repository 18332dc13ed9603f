import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cfhm.hypergraph import H1, H2, TripartiteHypergraph

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_tripartite(seed: int, n_p=8, n_q=6, n_r=6, p=2, q=1, r=2, m1=12, m2=10) -> TripartiteHypergraph:
    """Small random instance with the requested part profile and no duplicate edges."""
    rng = random.Random(seed)
    h1, h2 = set(), set()
    for _ in range(m1 * 4):
        if len(h1) >= m1:
            break
        ps = rng.sample(range(n_p), p)
        qs = rng.sample(range(n_p, n_p + n_q), q)
        h1.add(tuple(sorted(ps + qs)))
    for _ in range(m2 * 4):
        if len(h2) >= m2:
            break
        x = rng.randrange(n_p)
        rs = rng.sample(range(n_p + n_q, n_p + n_q + n_r), r)
        h2.add(tuple(sorted([x] + rs)))
    return TripartiteHypergraph.from_parts((n_p, n_q, n_r), (p, q, r), sorted(h1), sorted(h2))


@st.composite
def tripartite(draw, max_p=8):
    seed = draw(st.integers(0, 10**6))
    n_p = draw(st.integers(3, max_p))
    return random_tripartite(seed, n_p=n_p, m1=draw(st.integers(0, 14)), m2=draw(st.integers(0, 10)))


@pytest.fixture
def small_h():
    return random_tripartite(1)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((passed, detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p for p, _ in parts)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} | " + " | ".join(d for _, d in parts))
