"""Invertible Bloom filter.

A table of ``t`` cells, each ``(count, idSum, gSum)`` held as three uint64
words with wrap-around arithmetic (``count`` is read back as int64).  The
table is split into ``k`` equal subtables and every element touches one
cell per subtable.

Inserting, deleting, adding and subtracting are all linear, so an IBF of a
multiset is the signed sum of the IBFs of its parts.  ``list_items`` peels
cells whose count is +1 or -1 and whose checksum validates.

A validating cell can still hold several elements whose sums happen to
collide under ``g``.  That silent error is not detected; its probability
is at most ``k * m * 2**-lam`` for a difference of ``m`` elements.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import ConfigMismatch, FormatError
from .hashing import (
    MASK64,
    HashConfig,
    as_ids,
    ceil_log2,
    cell_indices,
    cell_indices_batch,
    checksum,
    checksum_batch,
    default_lambda,
)

FORMAT_MAGIC = b"SDRS"
FORMAT_VERSION = 1
KIND_IBF = 1
KIND_STRATA = 2
KIND_F2 = 3

_HEADER = struct.Struct("<4sHHQIII")


def params_for(m: int, epsilon: float, seed: int = 0) -> HashConfig:
    """Hash configuration decoding ``m`` differences with failure probability at most ``epsilon``.

    ``k = ceil(log2(m / epsilon)) + 2`` hash functions, ``t = 2 k m`` cells and
    ``lam = min(64, k + ceil(log2 k))`` checksum bits.

    >>> cfg = params_for(8, 1 / 16)
    >>> cfg.k, cfg.table_size, cfg.lam
    (9, 144, 13)
    """
    if m < 1:
        raise ValueError(f"capacity must be at least 1, got {m}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    k = ceil_log2(m / epsilon) + 2
    return HashConfig(seed, k, 2 * k * m, default_lambda(k))


@dataclass
class DecodeResult:
    positive: list[int] = field(default_factory=list)
    negative: list[int] = field(default_factory=list)
    complete: bool = True

    def __len__(self):
        return len(self.positive) + len(self.negative)


class Ibf:
    """An invertible Bloom filter over a fixed :class:`HashConfig`."""

    __slots__ = ("cfg", "cells")

    def __init__(self, cfg: HashConfig, cells: np.ndarray | None = None):
        self.cfg = cfg
        if cells is None:
            cells = np.zeros((cfg.table_size, 3), dtype=np.uint64)
        elif cells.shape != (cfg.table_size, 3) or cells.dtype != np.uint64:
            raise ValueError(f"cells must be uint64 of shape ({cfg.table_size}, 3)")
        self.cells = cells

    @classmethod
    def from_elements(cls, elements, cfg: HashConfig) -> Ibf:
        ibf = cls(cfg)
        ibf.insert_many(elements)
        return ibf

    @property
    def counts(self) -> np.ndarray:
        return self.cells[:, 0].view(np.int64)

    @property
    def id_sums(self) -> np.ndarray:
        return self.cells[:, 1]

    @property
    def g_sums(self) -> np.ndarray:
        return self.cells[:, 2]

    def copy(self) -> Ibf:
        return Ibf(self.cfg, self.cells.copy())

    def is_empty(self) -> bool:
        return not self.cells.any()

    def insert_many(self, elements, sign: int = 1) -> None:
        ids = as_ids(elements)
        if ids.shape[0] == 0:
            return
        n = ids.shape[0]
        kernels.scatter_cells(
            self.cells.reshape(-1),
            self.cfg.table_size,
            np.zeros(n, dtype=np.int64),
            np.arange(n, dtype=np.int64),
            cell_indices_batch(ids, self.cfg),
            ids,
            checksum_batch(ids, self.cfg),
            sign,
        )

    def delete_many(self, elements) -> None:
        self.insert_many(elements, sign=-1)

    def insert(self, x: int) -> None:
        self._update(x, 1)

    def delete(self, x: int) -> None:
        self._update(x, -1)

    def _update(self, x: int, d: int) -> None:
        x &= MASK64
        gx = checksum(x, self.cfg)
        row = self.cells
        for i in cell_indices(x, self.cfg):
            row[i, 0] = (int(row[i, 0]) + d) & MASK64
            row[i, 1] = (int(row[i, 1]) + d * x) & MASK64
            row[i, 2] = (int(row[i, 2]) + d * gx) & MASK64

    def is_member(self, x: int) -> bool | None:
        """True or False when a cell of ``x`` settles it, None when undetermined.

        False is only trustworthy if no element was deleted without having
        been inserted.
        """
        x &= MASK64
        gx = checksum(x, self.cfg)
        for i in cell_indices(x, self.cfg):
            c, s, g = (int(v) for v in self.cells[i])
            if c == 0 and s == 0 and g == 0:
                return False
            if c == 1 and s == x and g == gx:
                return True
        return None

    def _check(self, other: Ibf) -> None:
        if self.cfg != other.cfg:
            raise ConfigMismatch(f"IBF configs differ: {self.cfg} vs {other.cfg}")

    def subtract(self, other: Ibf) -> Ibf:
        self._check(other)
        return Ibf(self.cfg, self.cells - other.cells)

    def add(self, other: Ibf) -> Ibf:
        self._check(other)
        return Ibf(self.cfg, self.cells + other.cells)

    __sub__ = subtract
    __add__ = add

    def __eq__(self, other):
        if not isinstance(other, Ibf):
            return NotImplemented
        return self.cfg == other.cfg and np.array_equal(self.cells, other.cells)

    def __repr__(self):
        return f"Ibf(k={self.cfg.k}, t={self.cfg.table_size}, nonzero={int(self.cells.any(axis=1).sum())})"

    def list_items(self, max_items: int) -> DecodeResult:
        """Peel out at most ``max_items`` elements; the table itself is left untouched.

        Runs in ``O(t + max_items * k)``.  ``complete`` is True iff the
        working copy is all-zero when peeling stops.
        """
        if max_items < 0:
            raise ValueError("max_items must be non-negative")
        work = self.cells.copy()
        pos, neg, complete = kernels.peel(
            work,
            self.cfg.cell_keys,
            self.cfg.subtable_size,
            self.cfg.checksum_key,
            self.cfg.checksum_mask,
            max_items,
        )
        return DecodeResult(pos, neg, complete)

    def to_bytes(self) -> bytes:
        return pack_header(KIND_IBF, self.cfg) + self.cells.astype("<u8", copy=False).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> Ibf:
        kind, cfg, offset = unpack_header(data)
        if kind != KIND_IBF:
            raise FormatError(f"expected IBF payload, found kind {kind}")
        body = data[offset:]
        if len(body) != cfg.table_size * 24:
            raise FormatError(f"IBF body has {len(body)} bytes, expected {cfg.table_size * 24}")
        cells = np.frombuffer(body, dtype="<u8").astype(np.uint64).reshape(cfg.table_size, 3)
        return cls(cfg, cells)


def pack_header(kind: int, cfg: HashConfig) -> bytes:
    return _HEADER.pack(FORMAT_MAGIC, FORMAT_VERSION, kind, cfg.master_seed, cfg.k, cfg.table_size, cfg.lam)


def unpack_header(data: bytes) -> tuple[int, HashConfig, int]:
    if len(data) < _HEADER.size:
        raise FormatError("truncated sketch header")
    magic, version, kind, seed, k, t, lam = _HEADER.unpack_from(data)
    if magic != FORMAT_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    try:
        cfg = HashConfig(seed, k, t, lam)
    except ValueError as exc:
        raise FormatError(f"invalid hash config in header: {exc}") from None
    return kind, cfg, _HEADER.size
