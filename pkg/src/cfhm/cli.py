"""Command line front end: build, validate, match, decode and verify.

Exit codes: 0 success, 2 input error, 3 resample cap reached, 4 a vertex
without safe edges. CFHM_LOG sets the log level.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import pipeline
from .applications import build_covering, build_ramsey_cycles, build_ramsey_k4, build_steiner
from .boundedness import check_c_conditions, check_d_conditions, check_h_conditions, overlap_system
from .conflicts import read_conflicts
from .hypergraph import FormatError, HypergraphError, read_hypergraph
from .pipeline import InputError, dump_json
from .stage1 import PreconditionError
from .stage2 import LocalUnsatisfiableError

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_UNSAT = 0, 2, 3, 4


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = Parser(prog="cfhm", description="Conflict-free hypergraph matchings and their applications.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=Parser)

    b = sub.add_parser("build", help="build an application instance")
    b.add_argument("app", choices=["ramsey-cycles", "ramsey-k4", "covering", "steiner"])
    b.add_argument("--n", type=int)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--cycle-len", type=int, default=4)
    b.add_argument("--delta", type=float, default=0.25)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--m", type=int)
    b.add_argument("--s", type=int, default=3)
    b.add_argument("--t", type=int, default=2)
    b.add_argument("--ell", type=int)
    b.add_argument("--d", type=float)
    b.add_argument("--input", help="k-graph in hg form (P only) for the covering reduction")
    b.add_argument("--conflicts", help="conflicts on the input edges")
    b.add_argument("--format", choices=["hg", "json"], default="hg")
    b.add_argument("--out", default=".")

    v = sub.add_parser("validate", help="check the boundedness conditions")
    v.add_argument("dir")
    v.add_argument("--d", type=float)
    v.add_argument("--eps", type=float, default=0.1)
    v.add_argument("--mode", choices=["simple", "mixed", "both"], default="mixed")
    v.add_argument("--out")

    m = sub.add_parser("match", help="run stage 1 and stage 2")
    m.add_argument("dir")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--seeds", type=int, help="run seeds 0..SEEDS-1 instead of one seed")
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--eps", type=float, default=0.1)
    m.add_argument("--max-rounds", type=int, default=10_000)
    m.add_argument("--stage1-only", action="store_true")
    m.add_argument("--trackers", default="", help="comma-free list separated by ';', e.g. 'w_x:x=0,j1=1,j2=1'")
    m.add_argument("--pad", choices=["d", "max", "none"], default="d")
    m.add_argument("--force", action="store_true", help="skip the C precondition check")
    m.add_argument("--out")

    dcd = sub.add_parser("decode", help="turn a matching into a colouring or covering")
    dcd.add_argument("dir")
    dcd.add_argument("matching")
    dcd.add_argument("--out")

    f = sub.add_parser("verify", help="check a matching and its decoded object")
    f.add_argument("dir")
    f.add_argument("matching")
    f.add_argument("--out")
    return p


def _emit(obj, out) -> None:
    text = json.dumps(obj, sort_keys=True, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_build(a) -> int:
    if a.app == "ramsey-cycles":
        _need(a, "n")
        inst = build_ramsey_cycles(a.n, k=a.k, cycle_len=a.cycle_len, delta=a.delta)
    elif a.app == "ramsey-k4":
        _need(a, "n")
        inst = build_ramsey_k4(a.n, delta=a.delta, seed=a.seed)
    elif a.app == "steiner":
        _need(a, "m")
        inst = build_steiner(a.m, a.s, a.t, ell=a.ell or 4)
    else:
        _need(a, "input")
        g = read_hypergraph(a.input)
        if g.n_q or g.n_r or any(kl != 1 for kl in g.klass):
            raise InputError("covering input must be a plain k-graph: hg N 0 0 k 0 0 with e1 lines")
        conflicts = read_conflicts(a.conflicts, g).c if a.conflicts else []
        inst = build_covering(g.n_p, g.edges, conflicts, d=a.d, ell=a.ell)
    if a.d is not None:
        inst.d = a.d
    paths = pipeline.save_instance(inst, a.out, a.format)
    print("\n".join(str(p) for p in paths))
    return EXIT_OK


def _need(a, name: str) -> None:
    if getattr(a, name) is None:
        raise UsageError(f"{a.app} needs --{name.replace('_', '-')}")


def cmd_validate(a) -> int:
    inst = pipeline.load_instance(a.dir)
    d = a.d if a.d is not None else inst.d
    cs = inst.conflicts
    reports = {"H": check_h_conditions(inst.h, d, a.eps)}
    explicit = cs if getattr(cs, "explicit", False) else getattr(cs, "c_system", None)
    if explicit is not None:
        reports["C"] = check_c_conditions(explicit, d, a.eps)
        if getattr(cs, "explicit", False) and cs.d:
            reports["D"] = check_d_conditions(cs, d, a.eps, mode=a.mode)
    if inst.h.h2_ids:
        reports["E"] = check_d_conditions(overlap_system(inst.h), d, a.eps, mode="simple")
    out = {name: r.to_json() for name, r in reports.items()}
    out["implicit"] = [] if getattr(cs, "explicit", False) else ["D"]
    _emit(out, a.out)
    return EXIT_OK if all(r.holds for r in reports.values()) else 1


def _match_one(dir_: str, seed: int, a_dict: dict) -> tuple[int, dict]:
    inst = pipeline.load_instance(dir_)
    trackers = [t for t in a_dict["trackers"].split(";") if t]
    out = Path(a_dict["out"] or Path(dir_) / f"match-{seed}")
    out.mkdir(parents=True, exist_ok=True)
    try:
        m, stats, lg = pipeline.run_pipeline(
            inst, seed, eps=a_dict["eps"], max_rounds=a_dict["max_rounds"], stage1_only=a_dict["stage1_only"],
            trackers=trackers, pad=a_dict["pad"], force=a_dict["force"])
    except LocalUnsatisfiableError as exc:
        dump_json({"error": "no safe edge", "vertex": exc.x}, out / "log.json")
        return EXIT_UNSAT, {"seed": seed, "vertex": exc.x}
    dump_json(pipeline.matching_to_json(m), out / "matching.json")
    dump_json(stats, out / "stats.json")
    if lg is not None:
        dump_json(lg.to_json(), out / "log.json")
        if lg.outcome != "success":
            return EXIT_CAP, stats
    return EXIT_OK, stats


def cmd_match(a) -> int:
    opts = {k: getattr(a, k) for k in ("eps", "max_rounds", "stage1_only", "trackers", "pad", "force", "out")}
    if a.seeds is None:
        code, stats = _match_one(a.dir, a.seed, opts)
        print(json.dumps(stats, sort_keys=True))
        return code
    if opts["out"]:
        raise UsageError("--out names one directory; ensembles write match-SEED under the instance directory")
    seeds = list(range(a.seeds))
    if a.jobs > 1:
        with ProcessPoolExecutor(max_workers=a.jobs) as pool:
            results = list(pool.map(_match_one, [a.dir] * len(seeds), seeds, [opts] * len(seeds)))
    else:
        results = [_match_one(a.dir, s, opts) for s in seeds]
    for s, (code, stats) in zip(seeds, results):
        print(json.dumps({"seed": s, "exit": code}, sort_keys=True))
    return max(code for code, _ in results)


def _load_matching(inst, path):
    return pipeline.matching_from_json(pipeline.load_json(path), inst.h)


def cmd_decode(a) -> int:
    inst = pipeline.load_instance(a.dir)
    _emit(pipeline.decode(inst, _load_matching(inst, a.matching)), a.out)
    return EXIT_OK


def cmd_verify(a) -> int:
    inst = pipeline.load_instance(a.dir)
    m = _load_matching(inst, a.matching)
    try:
        reports = pipeline.verify_outputs(inst, m)
    except (KeyError, IndexError) as exc:
        raise InputError(f"metadata does not match the matching: {exc}") from None
    _emit({k: r.to_json() for k, r in reports.items()}, a.out)
    return EXIT_OK if all(r.passed for r in reports.values()) else 1


COMMANDS = {"build": cmd_build, "validate": cmd_validate, "match": cmd_match, "decode": cmd_decode,
            "verify": cmd_verify}


def main(argv=None) -> int:
    logging.basicConfig(level=pipeline.log_level(), format="%(levelname)s %(name)s: %(message)s")
    try:
        a = _parser().parse_args(argv)
        return COMMANDS[a.cmd](a)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, HypergraphError, PreconditionError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
