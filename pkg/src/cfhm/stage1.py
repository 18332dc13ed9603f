"""Stage 1: conflict-free random greedy on H1.

Each step draws an edge uniformly from the edges still alive. Edges die when
they meet a selected edge, when they would complete a C conflict, or when they
form a flagged conflict-sharing pair with a selected edge. Vertex and pair
deaths are applied eagerly; C-completion is checked when an edge is drawn,
which gives the same distribution as drawing from the truly alive edges.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .boundedness import check_c_conditions
from .conflicts import conflict_sharing_pairs  # noqa: F401  (re-exported)
from .hypergraph import Matching, TripartiteHypergraph, add_dummy_padding
from .rng import STAGE1, make_rng, uniform_index
from .tracking import Testability, Tracker, TrackerSpec

log = logging.getLogger(__name__)

REASONS = ("vertex-overlap", "completes-C-conflict", "conflict-sharing-pair")


class PreconditionError(ValueError):
    """Inputs fail a condition the matcher requires."""


@dataclass
class Stage1Result:
    matching: Matching
    seed: int
    draws: int
    exclusions: dict[str, int]
    trackers: list[dict] = field(default_factory=list)
    padded_q: int = 0

    @property
    def m1(self) -> frozenset[int]:
        return self.matching.m1

    def uncovered_fraction(self, n_p: int) -> float:
        return len(self.matching.uncovered) / n_p if n_p else 0.0

    def stats(self, h: TripartiteHypergraph) -> dict:
        return {
            "seed": self.seed,
            "|m1|": len(self.matching.m1),
            "uncovered_fraction": self.uncovered_fraction(h.n_p),
            "exclusion_counts": dict(self.exclusions),
            "draws": self.draws,
            "trackers": self.trackers,
        }


def _require_c_conditions(cs, d: float, eps: float) -> None:
    key = ("C", d, eps)
    if key not in cs._check_cache:
        cs._check_cache[key] = check_c_conditions(cs, d, eps)
    rep = cs._check_cache[key]
    if not rep.holds:
        bad = ", ".join(e.label for e in rep.failures())
        raise PreconditionError(f"C family fails {bad} at d={d}, eps={eps}")


def run_stage1(
    h: TripartiteHypergraph,
    cs,
    d: float,
    eps: float,
    seed: int,
    trackers=(),
    pad: bool | int = True,
    force: bool = False,
    share_eps: float | None = None,
    debug: bool = False,
) -> Stage1Result:
    """Grow a conflict-free matching in H1 and report which P-vertices it misses.

    `cs` is a `ConflictSystem` or any source with the same guard methods.
    Conflict-sharing pairs are flagged at exponent `share_eps` (default eps/2).
    `pad` raises Q-degrees with dummy edges: True pads to round(d), an int
    pads to that degree, False leaves H1 as it is.
    """
    share_eps = eps / 2 if share_eps is None else share_eps
    explicit = getattr(cs, "explicit", False)
    if explicit and not force:
        _require_c_conditions(cs, d, eps)
    target = int(round(d)) if pad is True else int(pad)
    work = add_dummy_padding(h, target) if pad is not False and h.n_q else h
    flagged = cs.sharing_pairs(d, share_eps)
    partners: dict[int, list[int]] = {}
    for e, f in flagged:
        partners.setdefault(e, []).append(f)
        partners.setdefault(f, []).append(e)

    rng = make_rng(seed, STAGE1)
    guard = cs.c_guard()
    alive = list(work.h1_ids)
    pos = {e: i for i, e in enumerate(alive)}
    exclusions = {r: 0 for r in REASONS}

    def drop(e: int) -> bool:
        i = pos.pop(e, None)
        if i is None:
            return False
        last = alive.pop()
        if last != e:
            alive[i] = last
            pos[last] = i
        return True

    def kill(e: int, reason: str) -> None:
        if drop(e):
            exclusions[reason] += 1

    tracked: list[Tracker] = []
    if trackers:
        if not explicit:
            raise ValueError("trackers need an explicit conflict system")
        gate = Testability(cs, flagged)
        tracked = [Tracker(s if isinstance(s, TrackerSpec) else TrackerSpec.parse(s), cs, gate) for s in trackers]

    m1: list[int] = []
    draws = 0
    is_dummy = work.dummy
    while alive:
        e = alive[uniform_index(rng, len(alive))]
        draws += 1
        if not is_dummy[e] and guard.completes(e):
            kill(e, "completes-C-conflict")
            continue
        drop(e)
        m1.append(e)
        if not is_dummy[e]:
            guard.add(e)
            for t in tracked:
                t.add(e)
                if debug and len(m1) % 100 == 0:
                    _check_tracker(t)
        for v in work.edges[e]:
            for f in work.inc1[v]:
                if f in pos:
                    kill(f, "vertex-overlap")
        for f in partners.get(e, ()):
            kill(f, "conflict-sharing-pair")

    real = [e for e in m1 if not is_dummy[e]]
    matching = Matching.build(h, real)
    reports = []
    if tracked:
        universe = h.h1_ids
        for t in tracked:
            _check_tracker(t)
            pred = t.prediction(d, universe)
            reports.append(
                {
                    "kind": t.spec.kind,
                    "params": t.spec.params(),
                    "value": t.value,
                    "prediction": pred,
                    "ratio": t.value / pred if pred else None,
                }
            )
    log.info("stage 1 seed=%s |m1|=%d draws=%d uncovered=%d", seed, len(real), draws, len(matching.uncovered))
    return Stage1Result(matching, seed, draws, exclusions, reports, work.n_q - h.n_q)


def _check_tracker(t: Tracker) -> None:
    fresh = t.recompute()
    if abs(fresh - t.value) > 1e-9 * max(1.0, abs(fresh)):
        raise AssertionError(f"tracker {t.spec} drifted: incremental {t.value}, fresh {fresh}")
