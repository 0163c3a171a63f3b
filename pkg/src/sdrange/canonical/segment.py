"""Segment tree for stabbing queries over closed integer segments."""

from __future__ import annotations

import numpy as np

from .base import CanonicalStructure, Dataset, SignedDecomposition, StabPoint
from .rangetree import balanced_shape, cover


class SegmentTree(CanonicalStructure):
    """Leaves are the elementary half-open intervals between consecutive breakpoints.

    A closed segment ``[lo, hi]`` equals ``[lo, hi + 1)`` on integers, so the
    breakpoints are every ``lo`` and ``hi + 1``.  A segment is stored at the
    maximal nodes whose span it covers; a stab returns the root-to-leaf path.
    """

    kind = "segment"

    def __init__(self, dataset: Dataset, _state=None):
        self.dataset = dataset
        if _state is None:
            self._build()
        else:
            for name in ("breaks", "members", "set_start", "set_stop", "left", "right"):
                setattr(self, name, _state[name])
        self._lists = tuple(a.tolist() for a in (self.set_start, self.set_stop, self.left, self.right))

    @property
    def leaf_count(self) -> int:
        return max(0, self.breaks.shape[0] - 1)

    def _build(self):
        ds = self.dataset
        lo, hi = ds.coords[:, 0], ds.coords[:, 1]
        self.breaks = np.unique(np.concatenate([lo, hi + 1])) if len(ds) else np.empty(0, dtype=np.int64)
        start, stop, left, right = balanced_shape(self.leaf_count)
        self.left, self.right = left, right
        lists = (start.tolist(), stop.tolist(), left.tolist(), right.tolist())
        a = np.searchsorted(self.breaks, lo)
        b = np.searchsorted(self.breaks, hi + 1)
        order = np.lexsort((ds.ids, hi, lo))
        nodes, segs = [], []
        for p in order.tolist():
            for v in cover(*lists, 0, int(a[p]), int(b[p])):
                nodes.append(v)
                segs.append(p)
        nodes = np.array(nodes, dtype=np.int64)
        segs = np.array(segs, dtype=np.int64)
        srt = np.argsort(nodes, kind="stable")
        self.members = segs[srt]
        counts = np.bincount(nodes, minlength=start.shape[0]).astype(np.int64)
        self.set_stop = np.cumsum(counts)
        self.set_start = self.set_stop - counts

    def decompose(self, query: StabPoint) -> SignedDecomposition:
        if not isinstance(query, StabPoint):
            raise TypeError(f"segment tree answers StabPoint queries, got {query!r}")
        if self.leaf_count == 0 or query.x < self.breaks[0] or query.x >= self.breaks[-1]:
            return SignedDecomposition()
        leaf = int(np.searchsorted(self.breaks, query.x, side="right")) - 1
        start, stop = self._leaf_spans()
        left, right = self._lists[2], self._lists[3]
        path = [0]
        v = 0
        while left[v] >= 0:
            v = left[v] if leaf < stop[left[v]] else right[v]
            path.append(v)
        return SignedDecomposition([(v, 1) for v in path])

    def _leaf_spans(self):
        if not hasattr(self, "_spans_cache"):
            s, e, _, _ = balanced_shape(self.leaf_count)
            self._spans_cache = (s.tolist(), e.tolist())
        return self._spans_cache

    def state(self):
        names = ("breaks", "members", "set_start", "set_stop", "left", "right")
        return {}, {name: getattr(self, name) for name in names}

    @classmethod
    def from_state(cls, dataset, meta, arrays):
        return cls(dataset, _state=arrays)
