"""Prefix-sum grids (1D and 2D): a canonical group structure.

Canonical set ``B[a, b]`` holds every item in cells ``(i, j)`` with
``i <= a`` and ``j <= b`` (1-based).  A block query is answered by
inclusion-exclusion, ``+B[k,l] - B[i-1,l] - B[k,j-1] + B[i-1,j-1]``, with
terms on an empty prefix (a zero index) dropped.
"""

from __future__ import annotations

import numpy as np

from .base import CanonicalStructure, Dataset, GridRect, SignedDecomposition


class PrefixGrid(CanonicalStructure):
    semigroup = False

    def __init__(self, dataset: Dataset, dims: tuple[int, ...] | None = None):
        self.dataset = dataset
        d = dataset.coords.shape[1]
        if dims is None:
            dims = tuple(int(v) for v in dataset.coords.max(axis=0)) if len(dataset) else (1,) * d
        dims = tuple(int(v) for v in dims)
        if len(dims) != d or any(g < 1 for g in dims):
            raise ValueError(f"grid dims {dims} do not match {d}-dimensional cells")
        c = dataset.coords
        if len(dataset) and ((c < 1).any() or (c > np.array(dims)).any()):
            raise ValueError(f"grid cell indices out of bounds for dims {dims}")
        self.dims = dims
        self.kind = "grid1d" if d == 1 else "grid2d"
        self.cell_of = self._flat(c - 1)

    def _flat(self, zero_based: np.ndarray) -> np.ndarray:
        if len(self.dims) == 1:
            return zero_based[:, 0].astype(np.int64)
        return (zero_based[:, 0] * self.dims[1] + zero_based[:, 1]).astype(np.int64)

    @property
    def set_count(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_count(self) -> int:
        return self.set_count

    def set_id(self, corner: tuple[int, ...]) -> int:
        """Id of the prefix ending at the 1-based ``corner``."""
        if len(self.dims) == 1:
            return corner[0] - 1
        return (corner[0] - 1) * self.dims[1] + corner[1] - 1

    def corner(self, sid: int) -> tuple[int, ...]:
        if len(self.dims) == 1:
            return (sid + 1,)
        return (sid // self.dims[1] + 1, sid % self.dims[1] + 1)

    def set_members(self, sid: int) -> np.ndarray:
        c = self.dataset.coords
        corner = self.corner(sid)
        mask = np.ones(len(self.dataset), dtype=bool)
        for axis, bound in enumerate(corner):
            mask &= c[:, axis] <= bound
        return np.flatnonzero(mask).astype(np.int64)

    def set_sizes(self) -> np.ndarray:
        per_cell = np.bincount(self.cell_of, minlength=self.cell_count).astype(np.int64)
        return self.prefix_accumulate(per_cell)

    def membership(self) -> tuple[np.ndarray, np.ndarray]:
        rows, pos = [], []
        for sid in range(self.set_count):
            m = self.set_members(sid)
            rows.append(np.full(m.shape[0], sid, dtype=np.int64))
            pos.append(m)
        if not rows:
            e = np.empty(0, dtype=np.int64)
            return e, e
        return np.concatenate(rows), np.concatenate(pos)

    def prefix_accumulate(self, per_cell: np.ndarray) -> np.ndarray:
        """Turn per-cell linear sketches (first axis = cell) into per-prefix sketches.

        Running sums along each grid axis realize
        ``S[a,b] = S[a-1,b] + S[a,b-1] - S[a-1,b-1] + cell[a,b]``; integer
        wrap-around keeps the result exact.
        """
        shaped = per_cell.reshape(self.dims + per_cell.shape[1:])
        for axis in range(len(self.dims)):
            shaped = np.cumsum(shaped, axis=axis, dtype=per_cell.dtype)
        return shaped.reshape(per_cell.shape)

    def decompose(self, query: GridRect) -> SignedDecomposition:
        if not isinstance(query, GridRect) or len(query.lo) != len(self.dims):
            raise TypeError(f"{len(self.dims)}D prefix grid answers matching GridRect queries, got {query!r}")
        for a, b, g in zip(query.lo, query.hi, self.dims):
            if a < 1 or b > g:
                raise ValueError(f"grid range {query.lo}-{query.hi} is outside dims {self.dims}")
        if len(self.dims) == 1:
            (i,), (k,) = query.lo, query.hi
            corners = [((k,), 1), ((i - 1,), -1)]
        else:
            (i, j), (k, l) = query.lo, query.hi
            corners = [((k, l), 1), ((i - 1, l), -1), ((k, j - 1), -1), ((i - 1, j - 1), 1)]
        return SignedDecomposition([(self.set_id(c), s) for c, s in corners if min(c) >= 1])

    def state(self):
        return {"dims": list(self.dims)}, {}

    @classmethod
    def from_state(cls, dataset, meta, arrays):
        return cls(dataset, tuple(meta["dims"]))
