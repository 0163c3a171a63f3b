"""Invariant checks run by ``sdrange selftest`` at small sizes with fixed seeds."""

from __future__ import annotations

import traceback
from pathlib import Path

import numpy as np

from . import _pure, container
from ._backend import BACKEND, kernels
from .bench import planted_pair, random_ids
from .canonical import (
    Dataset,
    FixedM,
    GridRect,
    Interval1D,
    Rect2D,
    StabPoint,
    attach_sketches,
    build_structure,
    contains,
)
from .engine import SdQuerySpec, naive_diff, query_diff
from .errors import FormatError
from .hashing import HashConfig, cell_indices, checksum
from .ibf import Ibf, params_for
from .sketches import f2_build, strata_build


def _check_hashing(rng, seed):
    cfg = HashConfig(seed, 4, 64, 6)
    for x in rng.integers(0, 1 << 48, 200).tolist():
        idx = cell_indices(x, cfg)
        assert idx == cell_indices(x, cfg)
        assert [i // cfg.subtable_size for i in idx] == list(range(cfg.k))
        assert 1 <= checksum(x, cfg) < 1 << cfg.lam


def _check_linearity(rng, seed):
    cfg = params_for(8, 0.05, seed)
    for _ in range(50):
        p = random_ids(rng, int(rng.integers(0, 40)))
        q = random_ids(rng, int(rng.integers(0, 40)))
        a, b = Ibf.from_elements(p, cfg), Ibf.from_elements(q, cfg)
        assert a.add(b) == Ibf.from_elements(np.concatenate([p, q]), cfg)
        direct = Ibf.from_elements(p, cfg)
        direct.delete_many(q)
        assert a.subtract(b) == direct
        assert a.add(b).subtract(b) == a
        pq = np.concatenate([p, q])
        assert f2_build(pq, 0.5, 0.1, seed) == f2_build(p, 0.5, 0.1, seed).add(f2_build(q, 0.5, 0.1, seed))
    sa = strata_build(p, 8, 0.1, 1 << 48, seed)
    sb = strata_build(q, 8, 0.1, 1 << 48, seed)
    assert sa.add(sb) == strata_build(np.concatenate([p, q]), 8, 0.1, 1 << 48, seed)


def _check_decode(rng, seed):
    for i in range(100):
        a, b = planted_pair(rng, 50, int(rng.integers(0, 9)), int(rng.integers(0, 9)))
        cfg = params_for(16, 0.05, seed + i)
        res = Ibf.from_elements(a, cfg).subtract(Ibf.from_elements(b, cfg)).list_items(16)
        if res.complete:
            assert sorted(res.positive) == sorted(set(a.tolist()) - set(b.tolist()))
            assert sorted(res.negative) == sorted(set(b.tolist()) - set(a.tolist()))


def _dataset(rng, kind, n):
    ids = random_ids(rng, n)
    if kind == "tree1d":
        return Dataset("X", ids, rng.integers(0, 100, (n, 1)), "points1d")
    if kind == "tree2d":
        return Dataset("X", ids, rng.integers(0, 100, (n, 2)), "points2d")
    if kind == "segment":
        lo = rng.integers(0, 100, n)
        return Dataset("X", ids, np.stack([lo, lo + rng.integers(0, 20, n)], 1), "segments")
    d = 1 if kind == "grid1d" else 2
    return Dataset("X", ids, rng.integers(1, 9, (n, d)), kind)


def _query(rng, kind):
    a, b = sorted(rng.integers(-5, 125, 2).tolist())
    if kind == "tree1d":
        return Interval1D(a, b)
    if kind == "tree2d":
        c, d = sorted(rng.integers(-5, 125, 2).tolist())
        return Rect2D(a, b, c, d)
    if kind == "segment":
        return StabPoint(a)
    d = 1 if kind == "grid1d" else 2
    lo = [int(v) for v in rng.integers(1, 9, d)]
    hi = [int(rng.integers(v, 9)) for v in lo]
    return GridRect(tuple(lo), tuple(hi))


def _dims(kind):
    return {"grid1d": (8,), "grid2d": (8, 8)}.get(kind)


def _check_decomposition(rng, seed):
    for kind in ("tree1d", "tree2d", "segment", "grid1d", "grid2d"):
        ds = _dataset(rng, kind, 120)
        st = build_structure(ds, kind, _dims(kind))
        for _ in range(50):
            q = _query(rng, kind)
            net = np.zeros(len(ds), dtype=np.int64)
            for sid, sign in st.decompose(q).terms:
                np.add.at(net, st.set_members(sid), sign)
            assert np.array_equal(net, contains(q, ds).astype(np.int64)), (kind, q)


def _check_engine(rng, seed):
    for kind in ("tree1d", "tree2d", "segment", "grid1d", "grid2d"):
        ds = _dataset(rng, kind, 120)
        keep = rng.random(len(ds)) > 0.03
        ds2 = Dataset("Y", ds.ids[keep], ds.coords[keep], ds.geometry)
        ia = attach_sketches(build_structure(ds, kind, _dims(kind)), FixedM(16, 0.05), seed)
        ib = attach_sketches(build_structure(ds2, kind, _dims(kind)), FixedM(16, 0.05), seed)
        for _ in range(20):
            q = _query(rng, kind)
            spec = SdQuerySpec(ia, q, ib, q)
            ans, truth = query_diff(spec), naive_diff(spec)
            if ans.ok:
                assert (ans.only_in_a, ans.only_in_b) == (truth.only_in_a, truth.only_in_b), (kind, q)


def _check_container(rng, seed):
    ds = _dataset(rng, "tree2d", 60)
    ix = attach_sketches(build_structure(ds, "tree2d"), FixedM(8, 0.05), seed)
    data = container.encode([ix])
    assert container.encode(container.decode(data)[0]) == data
    bad = bytearray(data)
    bad[-1] ^= 1
    try:
        container.decode(bytes(bad))
    except FormatError:
        pass
    else:
        raise AssertionError("corrupted container was accepted")


def _check_backend(rng, seed):
    if kernels is _pure:
        return
    ids = random_ids(rng, 500)
    cfg = params_for(16, 0.1, seed)
    assert np.array_equal(kernels.hash_cells(ids, cfg.cell_keys, cfg.subtable_size),
                          _pure.hash_cells(ids, cfg.cell_keys, cfg.subtable_size))
    assert np.array_equal(kernels.hash_checksums(ids, cfg.checksum_key, cfg.checksum_mask),
                          _pure.hash_checksums(ids, cfg.checksum_key, cfg.checksum_mask))


CHECKS = [
    ("hashing", _check_hashing),
    ("linearity and group laws", _check_linearity),
    ("decode vs naive oracle", _check_decode),
    ("decomposition coverage", _check_decomposition),
    ("engine vs naive oracle", _check_engine),
    ("container round trip", _check_container),
    ("compiled vs python kernels", _check_backend),
]


def reference_digest(seed: int) -> str:
    rng = np.random.default_rng(12345)
    ds = Dataset("ref", random_ids(rng, 64), rng.integers(0, 100, (64, 1)), "points1d")
    return container.sketch_digest(attach_sketches(build_structure(ds, "tree1d"), FixedM(8, 0.05), seed))


def run_selftest(seed: int = 0, index_path=None) -> tuple[bool, list[str]]:
    lines = [f"backend: {BACKEND}", f"seed: {seed}"]
    ok = True
    for name, check in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            check(rng, seed)
        except Exception as exc:  # noqa: BLE001 - every failure is reported, not raised
            ok = False
            detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
            lines.append(f"FAIL {name}: {detail}")
        else:
            lines.append(f"ok   {name}")
    lines.append(f"reference sketch digest: {reference_digest(seed)}")
    if index_path is not None:
        try:
            data = Path(index_path).read_bytes()
            indexes, _ = container.decode(data)
            if container.encode(indexes) != data:
                raise FormatError("re-encoding does not reproduce the file")
        except (OSError, FormatError) as exc:
            ok = False
            lines.append(f"FAIL serialization check ({index_path}): {exc}")
        else:
            lines.append(f"ok   serialization check ({index_path})")
            for ix in indexes:
                lines.append(f"     {ix.dataset.name}: {ix.kind}/{ix.mode.name} digest {container.sketch_digest(ix)}")
    lines.append("PASS" if ok else "FAIL")
    return ok, lines
