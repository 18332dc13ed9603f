"""Reductions from colouring and packing problems to conflict-free matchings."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Instance:
    """A reduction output: the auxiliary hypergraph, its conflicts and decoding data."""

    h: object
    conflicts: object
    d: float
    meta: dict = field(default_factory=dict)


from .covering import build_covering, decode_covering  # noqa: E402
from .ramsey_cycles import build_ramsey_cycles, decode_colouring  # noqa: E402
from .ramsey_k4 import build_ramsey_k4  # noqa: E402
from .steiner import build_steiner, decode_steiner  # noqa: E402

__all__ = [
    "Instance",
    "build_covering",
    "build_ramsey_cycles",
    "build_ramsey_k4",
    "build_steiner",
    "decode_colouring",
    "decode_covering",
    "decode_steiner",
]
