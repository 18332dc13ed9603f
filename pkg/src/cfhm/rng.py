"""Seeded random streams.

All randomness goes through numpy's Philox4x64 bit generator. Philox is
counter-based, so a (seed, stream) pair pins the whole sequence of draws
and two streams never overlap.
"""
from __future__ import annotations

import numpy as np

STAGE1 = 1
STAGE2 = 2
BUILD = 3


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for `seed`, with `stream` ids selecting an independent substream."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


def uniform_index(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in [0, n)."""
    return int(rng.integers(n))
