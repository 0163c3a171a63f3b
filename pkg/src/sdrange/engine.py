"""Set-difference range queries over two sketched indexes.

Each side's range is decomposed into signed canonical sets, their sketches
are combined, and the B side is subtracted from the A side.  Reporting
modes peel the result; counting modes estimate its size.  Items inside
both ranges cancel exactly, so only the symmetric difference survives.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .canonical.attach import F2Count, FixedM, SketchedIndex, StrataCount, Variable, combine
from .canonical.base import RangeQuery, contains, format_range
from .sketches.dissimilarity import DissimilarityReport, dissimilarities

DIFF = "diff"
TOO_LARGE = "too_large"
DECODE_FAILED = "decode_failed"


@dataclass
class SdQuerySpec:
    index_a: SketchedIndex
    range_a: RangeQuery
    index_b: SketchedIndex
    range_b: RangeQuery

    def check(self) -> None:
        self.index_a.check_compatible(self.index_b)

    @property
    def trivially_empty(self) -> bool:
        return self.index_a is self.index_b and self.range_a == self.range_b


@dataclass
class SdDiffAnswer:
    status: str
    only_in_a: list[int] = field(default_factory=list)
    only_in_b: list[int] = field(default_factory=list)
    level_used: int | None = None
    timing_ns: int = 0

    @property
    def ok(self) -> bool:
        return self.status == DIFF

    @property
    def size(self) -> int:
        return len(self.only_in_a) + len(self.only_in_b)

    def to_record(self) -> dict:
        rec = {"status": self.status}
        if self.ok:
            rec["onlyInA"] = self.only_in_a
            rec["onlyInB"] = self.only_in_b
        rec["levelUsed"] = self.level_used
        rec["timingNanos"] = self.timing_ns
        return rec


@dataclass
class SdCountAnswer:
    estimate: float
    delta: float
    epsilon: float
    mode: str
    timing_ns: int = 0

    def to_record(self) -> dict:
        return {"status": "count", "estimate": self.estimate, "delta": self.delta, "epsilon": self.epsilon,
                "mode": self.mode, "timingNanos": self.timing_ns}

    def dissimilarity(self, size_a: int, size_b: int, alpha: float = 1, beta: float = 1) -> DissimilarityReport:
        """Intersection, union and similarity measures from the estimated difference size."""
        est = min(float(self.estimate), float(size_a + size_b))
        return dissimilarities(size_a, size_b, est, alpha, beta)


@dataclass
class NaiveDiff:
    only_in_a: list[int]
    only_in_b: list[int]

    @property
    def size(self) -> int:
        return len(self.only_in_a) + len(self.only_in_b)


def _sides(spec: SdQuerySpec, level: int | None = None):
    a = combine(spec.index_a, spec.index_a.structure.decompose(spec.range_a), level)
    b = combine(spec.index_b, spec.index_b.structure.decompose(spec.range_b), level)
    return a, b


def _diff(result) -> tuple[list[int], list[int]]:
    return sorted(result.positive), sorted(result.negative)


def query_diff_fixed(spec: SdQuerySpec) -> SdDiffAnswer:
    """Report the difference if it has at most ``m`` elements, else ``too_large``."""
    t0 = time.perf_counter_ns()
    spec.check()
    spec.index_a.require(FixedM)
    if spec.trivially_empty:
        return SdDiffAnswer(DIFF, timing_ns=time.perf_counter_ns() - t0)
    a, b = _sides(spec)
    res = a.subtract(b).list_items(spec.index_a.mode.m)
    if res.complete:
        pos, neg = _diff(res)
        return SdDiffAnswer(DIFF, pos, neg, timing_ns=time.perf_counter_ns() - t0)
    return SdDiffAnswer(TOO_LARGE, timing_ns=time.perf_counter_ns() - t0)


def query_diff_variable(spec: SdQuerySpec) -> SdDiffAnswer:
    """Try capacities ``2**j`` for ``j = j_min .. j_max`` and return the first complete decode."""
    t0 = time.perf_counter_ns()
    spec.check()
    spec.index_a.require(Variable)
    mode = spec.index_a.mode
    if spec.trivially_empty:
        return SdDiffAnswer(DIFF, level_used=mode.j_min, timing_ns=time.perf_counter_ns() - t0)
    da = spec.index_a.structure.decompose(spec.range_a)
    db = spec.index_b.structure.decompose(spec.range_b)
    for j in range(mode.j_min, mode.j_max + 1):
        a = combine(spec.index_a, da, j)
        b = combine(spec.index_b, db, j)
        res = a.subtract(b).list_items(2**j)
        if res.complete:
            pos, neg = _diff(res)
            return SdDiffAnswer(DIFF, pos, neg, j, time.perf_counter_ns() - t0)
    return SdDiffAnswer(DECODE_FAILED, timing_ns=time.perf_counter_ns() - t0)


def query_diff(spec: SdQuerySpec) -> SdDiffAnswer:
    if isinstance(spec.index_a.mode, Variable):
        return query_diff_variable(spec)
    return query_diff_fixed(spec)


def query_count(spec: SdQuerySpec) -> SdCountAnswer:
    """Estimate ``|(R1 ∩ X1) xor (R2 ∩ X2)|`` with an F2 or strata sketch."""
    t0 = time.perf_counter_ns()
    spec.check()
    spec.index_a.require(F2Count, StrataCount)
    mode = spec.index_a.mode
    if spec.trivially_empty:
        est = 0.0
    else:
        a, b = _sides(spec)
        est = float(a.subtract(b).estimate())
    return SdCountAnswer(est, mode.delta, mode.epsilon, mode.name, time.perf_counter_ns() - t0)


def _net(index: SketchedIndex, query: RangeQuery) -> Counter:
    ds = index.dataset
    return Counter(int(v) for v in ds.ids[contains(query, ds)])


def naive_diff(spec: SdQuerySpec) -> NaiveDiff:
    """Brute-force range filter and exact signed difference on universe ids."""
    net = _net(spec.index_a, spec.range_a)
    net.subtract(_net(spec.index_b, spec.range_b))
    return NaiveDiff(sorted(x for x, c in net.items() if c > 0), sorted(x for x, c in net.items() if c < 0))


def naive_diff_sets(ids_a: np.ndarray, ids_b: np.ndarray) -> NaiveDiff:
    a, b = set(int(v) for v in ids_a), set(int(v) for v in ids_b)
    return NaiveDiff(sorted(a - b), sorted(b - a))


def describe(spec: SdQuerySpec) -> str:
    return (f"{spec.index_a.dataset.name}@{format_range(spec.range_a)} vs "
            f"{spec.index_b.dataset.name}@{format_range(spec.range_b)}")
