"""File handoff between build, match and verify.

An instance directory holds three files:

    instance.hg / instance.json   the auxiliary hypergraph
    conflicts.cf                  explicit conflicts, plus `oracle NAME` when
                                  some family is generated on demand
    meta.json                     builder parameters and decoding data

A match directory holds matching.json, stats.json and log.json.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from .applications import Instance
from .applications.covering import CoveringConflicts, decode_covering
from .applications.ramsey_cycles import CycleConflicts, Layout, decode_colouring
from .applications.ramsey_k4 import K4Conflicts, decode_k4_colouring, k4_layout
from .conflicts import ConflictSystem, format_conflicts, parse_conflicts
from .hypergraph import (
    FormatError,
    Matching,
    TripartiteHypergraph,
    format_hypergraph,
    hypergraph_from_json,
    hypergraph_to_json,
    parse_hypergraph,
)
from .stage1 import run_stage1
from .stage2 import run_stage2


class InputError(ValueError):
    """Bad files or parameters."""


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _oracle_name(inst: Instance) -> str | None:
    src = inst.conflicts
    if isinstance(src, CoveringConflicts):
        return "covering"
    if isinstance(src, CycleConflicts):
        return "ramsey-cycles"
    if isinstance(src, K4Conflicts):
        return "ramsey-k4"
    return None


def save_instance(inst: Instance, out, fmt: str = "hg") -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "hg":
        hpath = out / "instance.hg"
        hpath.write_text(format_hypergraph(inst.h))
    elif fmt == "json":
        hpath = out / "instance.json"
        dump_json(hypergraph_to_json(inst.h), hpath)
    else:
        raise InputError(f"unknown format {fmt!r}")
    oracle = _oracle_name(inst)
    if oracle == "covering":
        explicit = ConflictSystem(inst.h, c=inst.conflicts.source, ell=inst.conflicts.ell)
    elif oracle is not None:
        explicit = ConflictSystem(inst.h, ell=inst.conflicts.ell)
    else:
        explicit = inst.conflicts
    explicit.oracle = oracle
    cpath = out / "conflicts.cf"
    cpath.write_text(format_conflicts(explicit))
    meta = dict(inst.meta)
    meta.update({"d": inst.d, "ell": explicit.ell, "format": fmt})
    mpath = out / "meta.json"
    dump_json(meta, mpath)
    return [hpath, cpath, mpath]


def load_instance(path) -> Instance:
    path = Path(path)
    meta = load_json(path / "meta.json")
    fmt = meta.get("format", "hg")
    try:
        if fmt == "json":
            h = hypergraph_from_json(load_json(path / "instance.json"))
        else:
            h = parse_hypergraph((path / "instance.hg").read_text())
        cs = parse_conflicts((path / "conflicts.cf").read_text(), h, meta.get("ell"))
    except OSError as exc:
        raise InputError(str(exc)) from None
    except FormatError as exc:
        raise InputError(f"{exc}") from None
    src = attach_oracle(h, cs, meta)
    return Instance(h, src, float(meta["d"]), meta)


def attach_oracle(h: TripartiteHypergraph, cs: ConflictSystem, meta: dict):
    if cs.oracle is None:
        return cs
    if cs.oracle == "covering":
        return CoveringConflicts(h, cs.c, covering_underlying(h), ell=cs.ell)
    if cs.oracle == "ramsey-cycles":
        _require(meta, "ramsey-cycles", ("n", "k", "cycle_len", "t1", "t2"))
        lay = Layout(meta["n"], meta["k"], meta["cycle_len"], meta["t1"], meta["t2"])
        if lay.n_p != h.n_p:
            raise InputError("meta.json does not describe this hypergraph")
        return CycleConflicts(h, lay)
    if cs.oracle == "ramsey-k4":
        _require(meta, "ramsey-k4", ("n", "t1", "t2", "alive"))
        lay = k4_layout(Instance(h, None, 0.0, meta))
        if lay.n_p != h.n_p or len(lay.qid) != h.n_q:
            raise InputError("meta.json does not describe this hypergraph")
        return K4Conflicts(h, lay)
    raise InputError(f"unknown oracle {cs.oracle!r}")


def _require(meta: dict, app: str, keys) -> None:
    missing = [k for k in keys if k not in meta]
    if missing:
        raise InputError(f"{app} oracle needs {', '.join(missing)} in meta.json")


def covering_underlying(h: TripartiteHypergraph) -> list[int]:
    """Map each edge of a covering instance to the input edge it copies."""
    n = h.n_p
    by_verts = {h.edges[e]: e for e in h.h1_ids}
    under = list(range(len(h.edges)))
    for e in h.h2_ids:
        verts = h.edges[e]
        key = tuple(sorted((verts[0], *(v - n for v in verts[1:]))))
        if key not in by_verts:
            raise InputError(f"H2 edge {e} copies no H1 edge")
        under[e] = by_verts[key]
    return under


# matching

def run_pipeline(
    inst: Instance,
    seed: int,
    eps: float = 0.1,
    max_rounds: int = 10_000,
    stage1_only: bool = False,
    trackers=(),
    pad: str = "d",
    force: bool = False,
):
    """Stage 1 then stage 2. Returns (matching, stats, log or None)."""
    h = inst.h
    pad_arg = {"d": True, "none": False}.get(pad)
    if pad == "max":
        pad_arg = max((len(h.inc1[x]) for x in range(h.n_p)), default=0)
    if pad_arg is None and pad != "none":
        raise InputError(f"unknown padding mode {pad!r}")
    r1 = run_stage1(h, inst.conflicts, inst.d, eps, seed, trackers=trackers, pad=pad_arg, force=force)
    stats = {"stage1": r1.stats(h), "d": inst.d, "eps": eps, "pad": pad}
    if stage1_only:
        return r1.matching, stats, None
    m, lg = run_stage2(inst.conflicts, r1.matching.m1, seed, max_rounds=max_rounds, d=inst.d)
    stats["stage2"] = {"outcome": lg.outcome, "rounds": lg.n_rounds, "|m2|": len(m.m2)}
    return m, stats, lg


def matching_to_json(m: Matching) -> dict:
    return {"m1": sorted(m.m1), "m2": sorted(m.m2), "uncovered": sorted(m.uncovered)}


def matching_from_json(obj: dict, h: TripartiteHypergraph) -> Matching:
    try:
        m1 = [int(e) for e in obj["m1"]]
        m2 = [int(e) for e in obj.get("m2", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad matching file: {exc}") from None
    for e in m1 + m2:
        if not 0 <= e < len(h.edges):
            raise InputError(f"matching names unknown edge {e}")
    return Matching.build(h, m1, m2)


def decode(inst: Instance, m: Matching) -> dict:
    app = inst.meta.get("app")
    if app == "ramsey-cycles":
        col = decode_colouring(inst, m)
        return {"app": app, "colouring": [[*e, c] for e, c in sorted(col.items())]}
    if app == "ramsey-k4":
        col = decode_k4_colouring(inst, m)
        return {"app": app, "colouring": [[*e, c] for e, c in sorted(col.items())]}
    if app in ("covering", "steiner"):
        used = decode_covering(inst, m)
        out = {"app": app, "edges": used}
        if app == "steiner":
            kappa = inst.meta["kappa"]
            out["blocks"] = [kappa[g] for g in used]
        return out
    return {"app": app}


def log_level() -> str:
    return os.environ.get("CFHM_LOG", "WARNING").upper()


def verify_outputs(inst: Instance, m: Matching) -> dict:
    """Matching check plus the domain check the metadata asks for."""
    from . import verify

    h, meta = inst.h, inst.meta
    cs = inst.conflicts
    reports = {"matching": verify.verify_matching(h, m, cs if getattr(cs, "explicit", False) else None)}
    app = meta.get("app")
    if app == "ramsey-cycles":
        col = decode_colouring(inst, m)
        if len(col) == len(cs.lay.kedges):
            reports["colouring"] = verify.verify_ramsey_coloring(
                meta["n"], meta["k"], ("cycle", meta["cycle_len"]), meta["k"] + 1, col, palette=meta["palette"])
    elif app == "ramsey-k4":
        col = decode_k4_colouring(inst, m)
        if len(col) == len(cs.lay.pairs):
            reports["colouring"] = verify.verify_ramsey_coloring(meta["n"], 2, "k4", 5, col, palette=meta["palette"])
    elif app in ("covering", "steiner"):
        used = decode_covering(inst, m)
        edges = [tuple(e) for e in meta["edges"]]
        reports["covering"] = verify.verify_covering(h.n_p, edges, cs.source, used)
        if app == "steiner":
            kappa = meta["kappa"]
            reports["steiner"] = verify.verify_steiner(meta["m"], meta["s"], meta["t"], meta["ell"], [kappa[g] for g in used])
    return reports
