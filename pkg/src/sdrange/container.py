"""Index container: datasets, structure topology and sketch banks in one file.

Layout (all little-endian)::

    magic "SDRX" | u16 version | u16 reserved | u32 header length | u64 payload length
    | 32-byte sha256 of header + payload | JSON header | 8-byte aligned arrays

The JSON header uses sorted keys and lists every array by name, dtype,
shape and offset into the payload.  Writing the same indexes twice gives
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .canonical.attach import (
    STRUCTURES,
    F2Count,
    FixedM,
    IbfBank,
    SketchedIndex,
    StrataCount,
    Variable,
    mode_from_dict,
    mode_to_dict,
)
from .canonical.base import Dataset
from .errors import FormatError
from .hashing import HashConfig

MAGIC = b"SDRX"
VERSION = 1
_PRELUDE = struct.Struct("<4sHHIQ32s")


def _cfg_dict(cfg: HashConfig) -> dict:
    return {"seed": cfg.master_seed, "k": cfg.k, "t": cfg.table_size, "lam": cfg.lam}


def _cfg_from(d: dict) -> HashConfig:
    return HashConfig(d["seed"], d["k"], d["t"], d["lam"])


def _index_parts(idx: SketchedIndex) -> tuple[dict, dict[str, np.ndarray]]:
    ds = idx.dataset
    smeta, sarrays = idx.structure.state()
    arrays = {"ids": ds.ids, "coords": ds.coords}
    arrays.update({f"structure.{k}": v for k, v in sarrays.items()})
    banks = {}
    mode = idx.mode
    if isinstance(mode, FixedM):
        b = idx.banks["ibf"]
        banks["ibf"] = {"cfg": _cfg_dict(b.cfg)}
        arrays["ibf.cells"], arrays["ibf.row_of"] = b.cells, b.row_of
    elif isinstance(mode, Variable):
        for j, b in idx.banks.items():
            banks[f"level{j}"] = {"cfg": _cfg_dict(b.cfg), "j": j}
            arrays[f"level{j}.cells"], arrays[f"level{j}.row_of"] = b.cells, b.row_of
        arrays["tops"] = idx.tops
    elif isinstance(mode, F2Count):
        arrays["f2.counters"] = idx.banks["f2"]
    else:
        b = idx.banks["strata"]
        banks["strata"] = {"cfg": _cfg_dict(b["cfg"]), "m_prime": b["m_prime"]}
        arrays["strata.layers"] = b["layers"]
    meta = {
        "name": ds.name,
        "geometry": ds.geometry,
        "scale": ds.scale,
        "structure": idx.kind,
        "structure_meta": smeta,
        "mode": mode_to_dict(mode),
        "seed": idx.seed,
        "banks": banks,
        "sets": idx.structure.set_count,
        "cells": idx.cell_total(),
    }
    return meta, arrays


def encode(indexes: list[SketchedIndex], extra: dict | None = None) -> bytes:
    entries, blobs = [], []
    offset = 0
    for idx in indexes:
        meta, arrays = _index_parts(idx)
        table = []
        for name in sorted(arrays):
            a = np.ascontiguousarray(arrays[name])
            a = a.astype(a.dtype.newbyteorder("<"), copy=False)
            raw = a.tobytes()
            table.append({"name": name, "dtype": a.dtype.str, "shape": list(a.shape), "offset": offset})
            pad = -len(raw) % 8
            blobs.append(raw + b"\0" * pad)
            offset += len(raw) + pad
        meta["arrays"] = table
        entries.append(meta)
    header = json.dumps({"indexes": entries, "extra": extra or {}}, sort_keys=True, separators=(",", ":")).encode()
    header += b" " * (-(len(header) + _PRELUDE.size) % 8)
    payload = b"".join(blobs)
    digest = hashlib.sha256(header + payload).digest()
    return _PRELUDE.pack(MAGIC, VERSION, 0, len(header), len(payload), digest) + header + payload


def decode(data: bytes) -> tuple[list[SketchedIndex], dict]:
    """Parse and verify a container; any damage raises :class:`FormatError`."""
    if len(data) < _PRELUDE.size:
        raise FormatError("index file is truncated (no header)")
    magic, version, _, hlen, plen, digest = _PRELUDE.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"not an index file (magic {magic!r})")
    if version != VERSION:
        raise FormatError(f"unsupported index format version {version}")
    body = memoryview(data)[_PRELUDE.size:]
    if len(body) != hlen + plen:
        raise FormatError(f"index file has {len(body)} body bytes, header says {hlen + plen}")
    if hashlib.sha256(body).digest() != digest:
        raise FormatError("index checksum mismatch: file is corrupted")
    try:
        head = json.loads(bytes(body[:hlen]))
    except ValueError as exc:
        raise FormatError(f"unreadable index header: {exc}") from None
    buf = bytearray(body[hlen:])
    out = []
    for meta in head["indexes"]:
        arrays = {}
        for a in meta["arrays"]:
            dt = np.dtype(a["dtype"])
            count = int(np.prod(a["shape"], dtype=np.int64))
            if a["offset"] + count * dt.itemsize > len(buf):
                raise FormatError(f"array {a['name']} runs past the end of the payload")
            arr = np.frombuffer(buf, dtype=dt, count=count, offset=a["offset"]).reshape(a["shape"])
            arrays[a["name"]] = arr.astype(dt.newbyteorder("="), copy=False)
        out.append(_rebuild(meta, arrays))
    return out, head.get("extra", {})


def _rebuild(meta: dict, arrays: dict[str, np.ndarray]) -> SketchedIndex:
    ds = Dataset(meta["name"], arrays["ids"], arrays["coords"], meta["geometry"], meta["scale"])
    cls = STRUCTURES[meta["structure"]]
    sarrays = {k.split(".", 1)[1]: v for k, v in arrays.items() if k.startswith("structure.")}
    structure = cls.from_state(ds, meta["structure_meta"], sarrays)
    mode = mode_from_dict(meta["mode"])
    seed = meta["seed"]
    tops = None
    if isinstance(mode, FixedM):
        banks = {"ibf": IbfBank(_cfg_from(meta["banks"]["ibf"]["cfg"]), arrays["ibf.cells"], arrays["ibf.row_of"])}
    elif isinstance(mode, Variable):
        banks = {}
        for key, b in meta["banks"].items():
            banks[b["j"]] = IbfBank(_cfg_from(b["cfg"]), arrays[f"{key}.cells"], arrays[f"{key}.row_of"])
        banks = dict(sorted(banks.items()))
        tops = arrays["tops"]
    elif isinstance(mode, F2Count):
        banks = {"f2": arrays["f2.counters"]}
    elif isinstance(mode, StrataCount):
        b = meta["banks"]["strata"]
        banks = {"strata": {"cfg": _cfg_from(b["cfg"]), "m_prime": b["m_prime"], "layers": arrays["strata.layers"]}}
    return SketchedIndex(structure, mode, seed, banks, tops)


def save(path, indexes: list[SketchedIndex], extra: dict | None = None) -> int:
    data = encode(indexes, extra)
    Path(path).write_bytes(data)
    return len(data)


def load(path) -> tuple[list[SketchedIndex], dict]:
    return decode(Path(path).read_bytes())


def sketch_digest(idx: SketchedIndex) -> str:
    """Short sha256 over every sketch table of an index (changes with the seed)."""
    _, arrays = _index_parts(idx)
    h = hashlib.sha256()
    for name in sorted(arrays):
        if name.split(".")[0] in ("ibf", "f2", "strata") or name.startswith("level"):
            h.update(name.encode())
            h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()[:16]
