"""Reporting sketches: a fixed-capacity IBF and a ladder of IBFs at power-of-two capacities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigMismatch
from ..hashing import HashConfig, as_ids, ceil_log2
from ..ibf import DecodeResult, Ibf, params_for

J_MIN = 3


@dataclass
class SdrFixed:
    ibf: Ibf
    capacity: int
    epsilon: float

    def __eq__(self, other):
        if not isinstance(other, SdrFixed):
            return NotImplemented
        return (self.capacity, self.epsilon) == (other.capacity, other.epsilon) and self.ibf == other.ibf


def sdr_build(elements, m: int, epsilon: float, seed: int) -> SdrFixed:
    """IBF sized for ``m`` differences holding every element (overload is allowed)."""
    return SdrFixed(Ibf.from_elements(elements, params_for(m, epsilon, seed)), m, epsilon)


def sdr_report(a: SdrFixed, b: SdrFixed) -> DecodeResult:
    """Signed difference ``a - b``; ``complete`` is False when it is too large or fails to decode."""
    if (a.capacity, a.epsilon) != (b.capacity, b.epsilon):
        raise ConfigMismatch("SDR sketches were built for different capacities")
    return a.ibf.subtract(b.ibf).list_items(a.capacity)


def ladder_top(size: int, j_min: int = J_MIN) -> int:
    return max(j_min, ceil_log2(size))


def level_epsilon(epsilon: float, j_min: int, j_max: int) -> float:
    """Per-level failure budget; the doubling search union-bounds to ``epsilon``."""
    return epsilon / (j_max - j_min + 1)


def level_config(j: int, epsilon: float, seed: int, j_min: int, j_max: int) -> HashConfig:
    return params_for(2**j, level_epsilon(epsilon, j_min, j_max), seed)


@dataclass
class SdrHier:
    """Ladder of :class:`SdrFixed` at capacities ``2**j_min .. 2**top``.

    ``j_max`` fixes the number of levels the failure budget is split over;
    two ladders combine only if they agree on it.  ``elements`` is kept so
    that levels above the ladder top can be built on demand.
    """

    levels: dict[int, SdrFixed]
    epsilon: float
    seed: int
    j_min: int
    j_max: int
    elements: np.ndarray | None = None

    @property
    def top(self) -> int:
        return max(self.levels)

    def __eq__(self, other):
        if not isinstance(other, SdrHier):
            return NotImplemented
        same = (self.epsilon, self.seed, self.j_min, self.j_max) == (other.epsilon, other.seed, other.j_min, other.j_max)
        if not same or self.levels != other.levels:
            return False
        if self.elements is None or other.elements is None:
            return self.elements is other.elements
        return np.array_equal(self.elements, other.elements)

    def cell_count(self) -> int:
        return sum(s.ibf.cfg.table_size for s in self.levels.values())


def sdr_hier_build(
    elements, epsilon: float, seed: int, j_min: int = J_MIN, j_max: int | None = None,
    keep_elements: bool = True,
) -> SdrHier:
    ids = as_ids(elements)
    top = ladder_top(ids.shape[0], j_min)
    if j_max is None:
        j_max = top
    if j_max < top:
        raise ValueError(f"j_max={j_max} is below the ladder top {top}")
    levels = {}
    for j in range(j_min, top + 1):
        cfg = level_config(j, epsilon, seed, j_min, j_max)
        levels[j] = SdrFixed(Ibf.from_elements(ids, cfg), 2**j, level_epsilon(epsilon, j_min, j_max))
    return SdrHier(levels, epsilon, seed, j_min, j_max, ids if keep_elements else None)


def sdr_hier_level(h: SdrHier, j: int, elements=None) -> SdrFixed:
    """Level ``j`` of the ladder, built from the element list when above the stored top."""
    if j < h.j_min:
        raise ValueError(f"level {j} is below j_min={h.j_min}")
    if j in h.levels:
        return h.levels[j]
    src = h.elements if elements is None else as_ids(elements)
    if src is None:
        raise ValueError(f"level {j} is not stored and no element list is available")
    cfg = level_config(j, h.epsilon, h.seed, h.j_min, h.j_max)
    return SdrFixed(Ibf.from_elements(src, cfg), 2**j, level_epsilon(h.epsilon, h.j_min, h.j_max))
