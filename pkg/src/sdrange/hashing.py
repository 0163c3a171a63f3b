"""Seeded 64-bit hash families.

Every hash used by the sketches derives from one master seed through a
keyed SplitMix64-style mixer.  Four families are separated by fixed tags:

========  =======================  =====================================
family    tag                      used for
========  =======================  =====================================
cell      ``TAG_CELL``             the k subtable indices of an IBF
checksum  ``TAG_CHECKSUM``         the lambda-bit ``g(x)`` of an IBF
strata    ``TAG_STRATA``           layer sampling of a strata estimator
f2        ``TAG_F2``               bucket and sign of each F2 row
========  =======================  =====================================

The tags are part of the on-disk contract: an index decodes on another
machine only if both sides use the same constants.  Hashes are not
cryptographic.

The scalar functions here are the reference definitions; the batch
variants dispatch to the active kernel backend and must agree with them
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._backend import kernels

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

TAG_CELL = 0x243F6A8885A308D3
TAG_CHECKSUM = 0x13198A2E03707344
TAG_STRATA = 0xA4093822299F31D0
TAG_F2 = 0x082EFA98EC4E6C89


def mix64(z: int) -> int:
    z = (z + GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def function_key(seed: int, tag: int, index: int = 0) -> int:
    """Salt for function ``index`` of the family ``tag`` under ``seed``."""
    return mix64(mix64((seed ^ tag) & MASK64) ^ index)


def hash64(x: int, key: int) -> int:
    x &= MASK64
    return mix64((mix64(x ^ key) + key) & MASK64)


def ceil_log2(v: float) -> int:
    """Smallest integer c with 2**c >= v, robust to float noise at powers of two."""
    if v <= 1:
        return 0
    c = math.ceil(math.log2(v))
    if 2 ** (c - 1) >= v * (1 - 1e-12):
        c -= 1
    return c


def default_lambda(k: int) -> int:
    return min(64, k + ceil_log2(k))


@dataclass(frozen=True)
class HashConfig:
    """Hash parameters of one IBF: seed, k index functions, t cells, lambda checksum bits."""

    master_seed: int
    k: int
    table_size: int
    lam: int

    def __post_init__(self):
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if self.table_size <= 0 or self.table_size % self.k:
            raise ValueError(
                f"table_size must be a positive multiple of k={self.k}, got {self.table_size}"
            )
        if not default_lambda(self.k) <= self.lam <= 64:
            raise ValueError(
                f"lam must lie in [{default_lambda(self.k)}, 64] for k={self.k}, got {self.lam}"
            )

    @property
    def subtable_size(self) -> int:
        return self.table_size // self.k

    @property
    def checksum_mask(self) -> int:
        return (1 << self.lam) - 1

    @cached_property
    def cell_keys(self) -> np.ndarray:
        return np.array(
            [function_key(self.master_seed, TAG_CELL, i) for i in range(self.k)], dtype=np.uint64
        )

    @cached_property
    def checksum_key(self) -> int:
        return function_key(self.master_seed, TAG_CHECKSUM, 0)


def cell_indices(x: int, cfg: HashConfig) -> list[int]:
    """The k cells of ``x``; the i-th lies in subtable i, so they are always distinct."""
    sub = cfg.subtable_size
    return [i * sub + hash64(x, int(key)) % sub for i, key in enumerate(cfg.cell_keys)]


def checksum(x: int, cfg: HashConfig) -> int:
    """``g(x)`` in ``[1, 2**lam)``; zero is never produced."""
    return hash64(x, cfg.checksum_key) % cfg.checksum_mask + 1


def trailing_layer(h: int, layers: int) -> int:
    """Trailing-zero count of ``h`` clamped to ``layers - 1``; ``h == 0`` maps to the top layer."""
    if h == 0:
        return layers - 1
    return min((h & -h).bit_length() - 1, layers - 1)


def strata_layer(x: int, seed: int, layers: int) -> int:
    return trailing_layer(hash64(x, function_key(seed, TAG_STRATA, 0)), layers)


def f2_hashes(x: int, row: int, seed: int, buckets: int) -> tuple[int, int]:
    """Bucket in ``[0, buckets)`` and sign in ``{-1, +1}`` of ``x`` for one F2 row."""
    h = hash64(x, function_key(seed, TAG_F2, row))
    return ((h >> 32) * buckets) >> 32, 1 if h & 1 else -1


def f2_row_keys(seed: int, rows: int) -> np.ndarray:
    return np.array([function_key(seed, TAG_F2, r) for r in range(rows)], dtype=np.uint64)


def as_ids(ids) -> np.ndarray:
    """Element ids as a contiguous uint64 array (negative Python ints wrap)."""
    if isinstance(ids, np.ndarray):
        if ids.dtype == np.uint64:
            return np.ascontiguousarray(ids)
        if ids.dtype.kind in "iu":
            return np.ascontiguousarray(ids.astype(np.int64).view(np.uint64))
    return np.array([int(v) & MASK64 for v in ids], dtype=np.uint64)


def cell_indices_batch(ids, cfg: HashConfig) -> np.ndarray:
    """``(n, k)`` int64 cell indices, row i equal to ``cell_indices(ids[i], cfg)``."""
    return kernels.hash_cells(as_ids(ids), cfg.cell_keys, cfg.subtable_size)


def checksum_batch(ids, cfg: HashConfig) -> np.ndarray:
    return kernels.hash_checksums(as_ids(ids), cfg.checksum_key, cfg.checksum_mask)


def strata_layer_batch(ids, seed: int, layers: int) -> np.ndarray:
    return kernels.hash_strata(as_ids(ids), function_key(seed, TAG_STRATA, 0), layers)


def f2_hashes_batch(ids, rows: int, seed: int, buckets: int) -> tuple[np.ndarray, np.ndarray]:
    """``(n, rows)`` buckets and signs."""
    return kernels.hash_f2(as_ids(ids), f2_row_keys(seed, rows), buckets)
