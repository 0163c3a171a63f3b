"""Command-line front end: ingest, build, diff, count, bench, selftest.

Input is line-delimited JSON, one item per line::

    {"set": "A", "id": 10, "x": 1, "y": 1}     points (tree1d uses x only)
    {"set": "A", "id": 11, "lo": 3, "hi": 9}   segments
    {"set": "A", "id": 12, "i": 2, "j": 5}     grid cells, 1-based (grid1d uses i only)

Exit codes: 0 success, 1 usage, 2 data error, 3 self-test failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import container
from .bench import SUITES, run_suite
from .canonical import (
    GEOMETRIES,
    STRUCTURE_GEOMETRY,
    Dataset,
    F2Count,
    FixedM,
    StrataCount,
    Variable,
    attach_sketches,
    build_structure,
    parse_range,
)
from .engine import SdQuerySpec, query_count, query_diff
from .errors import DataError, SdrangeError
from .hashing import ceil_log2

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SELFTEST = 0, 1, 2, 3
SEED_ENV = "SDRANGE_SEED"

_FIELDS = {
    "points1d": ("x",),
    "points2d": ("x", "y"),
    "segments": ("lo", "hi"),
    "grid1d": ("i",),
    "grid2d": ("i", "j"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _quantize(v, scale, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DataError(f"{where}: coordinate {v!r} is not a number")
    if scale is not None:
        return int(round(v * scale))
    if isinstance(v, float):
        if not v.is_integer():
            raise DataError(f"{where}: non-integral coordinate {v} needs --scale")
        v = int(v)
    return v


def ingest(path, structure: str, scale: float | None = None, allow_duplicates: bool = False,
           id_bits: int | None = 48) -> tuple[dict[str, Dataset], list[str]]:
    """Parse and validate JSONL records into one :class:`Dataset` per set name."""
    if structure not in STRUCTURE_GEOMETRY:
        raise UsageError(f"unknown structure {structure!r}; choose from {', '.join(STRUCTURE_GEOMETRY)}")
    geometry = STRUCTURE_GEOMETRY[structure]
    fields = _FIELDS[geometry]
    groups: dict[str, tuple[list, list]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: malformed JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise DataError(f"{where}: expected a JSON object")
            missing = [f for f in ("set", "id", *fields) if f not in rec]
            if missing:
                raise DataError(f"{where}: missing field(s) {', '.join(missing)} for {structure}")
            uid = rec["id"]
            if isinstance(uid, bool) or not isinstance(uid, int) or uid < 0:
                raise DataError(f"{where}: id must be a non-negative integer, got {uid!r}")
            if uid >= 1 << 64:
                raise DataError(f"{where}: id {uid} does not fit in 64 bits")
            ids, coords = groups.setdefault(str(rec["set"]), ([], []))
            ids.append(uid)
            coords.append([_quantize(rec[f], scale, where) for f in fields])
    datasets, warnings = {}, []
    for name, (ids, coords) in groups.items():
        ds = Dataset(name, np.array(ids, dtype=np.uint64),
                     np.array(coords, dtype=np.int64).reshape(-1, GEOMETRIES[geometry]), geometry, scale)
        warnings += ds.validate(id_bits, allow_duplicates)
        datasets[name] = ds
    return datasets, warnings


def _mode(args) -> object:
    name = args.mode
    if name == "fixed":
        if args.m is None:
            raise UsageError("--mode fixed needs --m")
        return FixedM(args.m, args.epsilon)
    if name == "variable":
        return Variable(args.epsilon)
    if name == "f2":
        return F2Count(args.delta, args.epsilon)
    if name == "strata":
        return StrataCount(args.delta, args.epsilon, args.universe)
    raise UsageError(f"unknown mode {name!r}")


def _check_unit(name: str, v: float) -> None:
    if not 0 < v < 1:
        raise UsageError(f"--{name} must lie in (0, 1), got {v}")


def _emit(args, record: dict, text: str) -> None:
    print(json.dumps(record, sort_keys=True) if args.json else text)


def cmd_ingest(args) -> int:
    datasets, warnings = ingest(args.input, args.structure, args.scale, args.allow_duplicates)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    rec = {"structure": args.structure, "scale": args.scale,
           "sets": {name: len(ds) for name, ds in sorted(datasets.items())}}
    _emit(args, rec, "\n".join(f"{name}: {n} items" for name, n in rec["sets"].items()) or "no items")
    return EXIT_OK


def cmd_build(args) -> int:
    _check_unit("epsilon", args.epsilon)
    _check_unit("delta", args.delta)
    mode = _mode(args)
    datasets, warnings = ingest(args.input, args.structure, args.scale, args.allow_duplicates)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not datasets:
        raise DataError(f"{args.input}: no items")
    dims = tuple(args.dims) if args.dims else None
    if dims is None and args.structure.startswith("grid"):
        # a shared grid shape keeps prefix ids comparable across sets
        dims = tuple(int(max(ds.coords[:, a].max() for ds in datasets.values()))
                     for a in range(GEOMETRIES[STRUCTURE_GEOMETRY[args.structure]]))
    if isinstance(mode, Variable):
        # every set must split the failure budget over the same number of levels
        n_max = max(len(ds) for ds in datasets.values())
        mode = Variable(mode.epsilon, mode.j_min, max(mode.j_min, ceil_log2(max(n_max, 1)) + 1))
    indexes = []
    for name in sorted(datasets):
        st = build_structure(datasets[name], args.structure, dims)
        indexes.append(attach_sketches(st, mode, args.seed))
    size = container.save(args.output, indexes)
    rec = {"output": str(args.output), "bytes": size, "seed": args.seed, "structure": args.structure,
           "mode": indexes[0].mode.name,
           "sets": {ix.dataset.name: {"items": len(ix.dataset), "canonical_sets": ix.structure.set_count,
                                      "cells": ix.cell_total()} for ix in indexes}}
    _emit(args, rec, f"wrote {args.output} ({size} bytes, {len(indexes)} set(s), mode {rec['mode']})")
    return EXIT_OK


def _pick(path, name: str | None):
    indexes, _ = container.load(path)
    if name is None:
        if len(indexes) != 1:
            names = ", ".join(ix.dataset.name for ix in indexes)
            raise UsageError(f"{path} holds several sets ({names}); choose one with --set-a/--set-b")
        return indexes[0]
    for ix in indexes:
        if ix.dataset.name == name:
            return ix
    raise UsageError(f"{path} has no set named {name!r}")


def _spec(args) -> SdQuerySpec:
    ia = _pick(args.index_a, args.set_a)
    ib = ia if (args.index_b == args.index_a and args.set_b == args.set_a) else _pick(args.index_b, args.set_b)
    ra = parse_range(args.range_a, args.scale)
    rb = parse_range(args.range_b, args.scale) if args.range_b is not None else ra
    return SdQuerySpec(ia, ra, ib, rb)


def cmd_diff(args) -> int:
    ans = query_diff(_spec(args))
    rec = ans.to_record()
    if ans.ok:
        text = f"only in A: {ans.only_in_a}\nonly in B: {ans.only_in_b}"
    else:
        text = ans.status.replace("_", " ")
    _emit(args, rec, text)
    return EXIT_OK


def cmd_count(args) -> int:
    spec = _spec(args)
    ans = query_count(spec)
    _emit(args, ans.to_record(), f"estimated difference size: {ans.estimate:g} ({ans.mode})")
    return EXIT_OK


def cmd_bench(args) -> int:
    kw = {"seed": args.seed}
    if args.trials is not None:
        kw["queries" if args.suite == "scaling" else "trials"] = args.trials
    if args.suite in ("decode", "scaling"):
        kw["m"] = args.m or 16
        kw["epsilon"] = args.epsilon
    elif args.suite in ("count-accuracy", "strata-accuracy"):
        kw.update(delta=args.delta, epsilon=args.epsilon)
    else:
        kw["epsilon"] = args.epsilon
    rep = run_suite(args.suite, **kw)
    if args.csv:
        rep.write_csv(args.csv)
    _emit(args, rep.to_dict(), json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok, lines = run_selftest(args.seed, args.index)
    for line in lines:
        print(line)
    return EXIT_OK if ok else EXIT_SELFTEST


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help=f"master seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--json", action="store_true", help="emit one JSON record")
    common.add_argument("--scale", type=float, default=None, help="multiply coordinates by this and round")

    p = _Parser(prog="sdrange", description="Set-difference range queries with linear sketches.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp):
        sp.add_argument("input", type=Path)
        sp.add_argument("--structure", required=True, choices=sorted(STRUCTURE_GEOMETRY))
        sp.add_argument("--allow-duplicates", action="store_true", help="downgrade duplicate ids to a warning")

    sp = sub.add_parser("ingest", parents=[common], help="validate a JSONL dataset")
    data_args(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("build", parents=[common], help="build a sketched index file")
    data_args(sp)
    sp.add_argument("-o", "--output", type=Path, required=True)
    sp.add_argument("--mode", choices=["fixed", "variable", "f2", "strata"], default="variable")
    sp.add_argument("--m", type=int, default=None, help="capacity for --mode fixed")
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--universe", type=lambda s: int(s, 0), default=1 << 48, help="id universe size (strata)")
    sp.add_argument("--dims", type=int, nargs="+", default=None, help="grid shape (grid structures)")
    sp.set_defaults(func=cmd_build)

    for name, func, hlp in (("diff", cmd_diff, "report the set difference"),
                            ("count", cmd_count, "estimate the set-difference size")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("index_a", type=Path)
        sp.add_argument("index_b", type=Path)
        sp.add_argument("--range-a", required=True, help='e.g. "x:[0,10],y:[2,5]", "x:7" or "(1,1)-(3,4)"')
        sp.add_argument("--range-b", default=None, help="defaults to --range-a")
        sp.add_argument("--set-a", default=None)
        sp.add_argument("--set-b", default=None)
        sp.set_defaults(func=func)

    sp = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    sp.add_argument("suite", choices=SUITES)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--csv", type=Path, default=None, help="write plot data here")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    sp.add_argument("--index", type=Path, default=None, help="also verify this index file")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if not 0 <= args.seed < 1 << 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        return args.func(args)
    except UsageError as exc:
        print(f"sdrange: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SdrangeError, MemoryError, OSError, ValueError, TypeError) as exc:
        print(f"sdrange: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
