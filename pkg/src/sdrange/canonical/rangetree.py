"""Static 1D and 2D range trees.

Both are leaf-based balanced binary trees over items sorted by
``(coordinate, universe id)``; a node's canonical set is the run of items
below it.  The 2D tree hangs a y-sorted 1D tree off every x-node and uses
the y-nodes as its canonical sets (no fractional cascading).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .base import CanonicalStructure, Dataset, Interval1D, Rect2D, SignedDecomposition


@lru_cache(maxsize=None)
def balanced_shape(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Preorder ``(start, stop, left, right)`` of the midpoint-split tree over ``[0, n)``.

    Leaves are single positions; ``left``/``right`` are -1 at leaves.
    """
    if n <= 0:
        e = np.empty(0, dtype=np.int64)
        return e, e, e, e
    size = 2 * n - 1
    start = np.empty(size, dtype=np.int64)
    stop = np.empty(size, dtype=np.int64)
    left = np.full(size, -1, dtype=np.int64)
    right = np.full(size, -1, dtype=np.int64)
    stack = [(0, n, -1, 0)]
    nxt = 0
    while stack:
        s, e, parent, side = stack.pop()
        v = nxt
        nxt += 1
        start[v], stop[v] = s, e
        if parent >= 0:
            (left if side == 0 else right)[parent] = v
        if e - s > 1:
            mid = (s + e) // 2
            stack.append((mid, e, v, 1))
            stack.append((s, mid, v, 0))
    for a in (start, stop, left, right):
        a.setflags(write=False)
    return start, stop, left, right


def tree_height(n: int) -> int:
    return 0 if n <= 1 else (n - 1).bit_length()


def cover(start, stop, left, right, root: int, a: int, b: int) -> list[int]:
    """Maximal nodes of the tree at ``root`` whose position runs lie inside ``[a, b)``, left to right."""
    out = []
    if a >= b:
        return out
    stack = [root]
    while stack:
        v = stack.pop()
        s, e = start[v], stop[v]
        if e <= a or b <= s:
            continue
        if a <= s and e <= b:
            out.append(v)
            continue
        stack.append(right[v])
        stack.append(left[v])
    return out


class RangeTree1D(CanonicalStructure):
    kind = "tree1d"

    def __init__(self, dataset: Dataset, _state=None):
        self.dataset = dataset
        if _state is None:
            x = dataset.coords[:, 0]
            order = np.lexsort((dataset.ids, x)).astype(np.int64)
            start, stop, left, right = balanced_shape(len(dataset))
            self.members = order
            self.set_start, self.set_stop, self.left, self.right = start, stop, left, right
        else:
            self.members = _state["members"]
            self.set_start, self.set_stop = _state["set_start"], _state["set_stop"]
            self.left, self.right = _state["left"], _state["right"]
        self.keys = dataset.coords[self.members, 0]
        self._lists = tuple(a.tolist() for a in (self.set_start, self.set_stop, self.left, self.right))

    def position_range(self, lo: int, hi: int) -> tuple[int, int]:
        return (
            int(np.searchsorted(self.keys, lo, side="left")),
            int(np.searchsorted(self.keys, hi, side="right")),
        )

    def decompose(self, query: Interval1D) -> SignedDecomposition:
        if not isinstance(query, Interval1D):
            raise TypeError(f"1D range tree answers Interval1D queries, got {query!r}")
        if self.set_count == 0:
            return SignedDecomposition()
        a, b = self.position_range(query.lo, query.hi)
        return SignedDecomposition([(v, 1) for v in cover(*self._lists, 0, a, b)])

    def state(self):
        return {}, {
            "members": self.members, "set_start": self.set_start, "set_stop": self.set_stop,
            "left": self.left, "right": self.right,
        }

    @classmethod
    def from_state(cls, dataset, meta, arrays):
        return cls(dataset, _state=arrays)


class RangeTree2D(CanonicalStructure):
    kind = "tree2d"

    def __init__(self, dataset: Dataset, _state=None):
        self.dataset = dataset
        x, y, ids = dataset.coords[:, 0], dataset.coords[:, 1], dataset.ids
        if _state is None:
            self._build(x, y, ids)
        else:
            for name in ("xorder", "xstart", "xstop", "xleft", "xright", "yroot", "yoff",
                         "members", "set_start", "set_stop", "left", "right"):
                setattr(self, name, _state[name])
        self.xkeys = x[self.xorder]
        self.ykeys = y[self.members]
        self._xlists = tuple(a.tolist() for a in (self.xstart, self.xstop, self.xleft, self.xright))
        self._ylists = tuple(a.tolist() for a in (self.set_start, self.set_stop, self.left, self.right))
        self._yroot = self.yroot.tolist()
        self._yoff = self.yoff.tolist()

    def _build(self, x, y, ids):
        n = x.shape[0]
        self.xorder = np.lexsort((ids, x)).astype(np.int64)
        self.xstart, self.xstop, self.xleft, self.xright = balanced_shape(n)
        nx = self.xstart.shape[0]
        yroot = np.empty(nx, dtype=np.int64)
        yoff = np.empty(nx, dtype=np.int64)
        members, starts, stops, lefts, rights = [], [], [], [], []
        off = 0
        base = 0
        for v in range(nx):
            pts = self.xorder[self.xstart[v]:self.xstop[v]]
            pts = pts[np.lexsort((ids[pts], y[pts]))]
            s, e, l, r = balanced_shape(pts.shape[0])
            members.append(pts)
            starts.append(s + off)
            stops.append(e + off)
            lefts.append(np.where(l >= 0, l + base, -1))
            rights.append(np.where(r >= 0, r + base, -1))
            yroot[v] = base
            yoff[v] = off
            off += pts.shape[0]
            base += s.shape[0]
        cat = (lambda parts: np.concatenate(parts)) if nx else (lambda parts: np.empty(0, dtype=np.int64))
        self.members = cat(members).astype(np.int64)
        self.set_start, self.set_stop = cat(starts), cat(stops)
        self.left, self.right = cat(lefts), cat(rights)
        self.yroot, self.yoff = yroot, yoff

    def decompose(self, query: Rect2D) -> SignedDecomposition:
        if not isinstance(query, Rect2D):
            raise TypeError(f"2D range tree answers Rect2D queries, got {query!r}")
        terms = []
        if self.xstart.shape[0] == 0:
            return SignedDecomposition()
        a = int(np.searchsorted(self.xkeys, query.xlo, side="left"))
        b = int(np.searchsorted(self.xkeys, query.xhi, side="right"))
        xs, xe = self._xlists[0], self._xlists[1]
        for v in cover(*self._xlists, 0, a, b):
            off = self._yoff[v]
            seg = self.ykeys[off:off + xe[v] - xs[v]]
            c = off + int(np.searchsorted(seg, query.ylo, side="left"))
            d = off + int(np.searchsorted(seg, query.yhi, side="right"))
            terms.extend((w, 1) for w in cover(*self._ylists, self._yroot[v], c, d))
        return SignedDecomposition(terms)

    def state(self):
        names = ("xorder", "xstart", "xstop", "xleft", "xright", "yroot", "yoff",
                 "members", "set_start", "set_stop", "left", "right")
        return {}, {name: getattr(self, name) for name in names}

    @classmethod
    def from_state(cls, dataset, meta, arrays):
        return cls(dataset, _state=arrays)
