"""Second-frequency-moment sketch used to estimate symmetric-difference sizes.

Each of ``R`` rows hashes an element to one of ``B`` buckets with a random
sign and adds ``sign * v`` there.  For the difference of two set
sketches, the sum of squared counters in a row estimates the squared
Euclidean norm of the indicator difference, i.e. the Hamming distance;
the estimate is the median over rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._backend import kernels
from ..errors import ConfigMismatch
from ..hashing import as_ids, f2_hashes, f2_hashes_batch


def f2_dims(delta: float, epsilon: float) -> tuple[int, int]:
    """``(rows, buckets) = (ceil(8 ln(1/epsilon)), ceil(4 / delta**2))``."""
    if not 0 < delta < 1 or not 0 < epsilon < 1:
        raise ValueError(f"delta and epsilon must lie in (0, 1), got {delta}, {epsilon}")
    rows = math.ceil(8 * math.log(1 / epsilon) - 1e-9)
    buckets = math.ceil(4 / delta**2 - 1e-9)
    return max(rows, 1), max(buckets, 1)


@dataclass
class F2Sketch:
    counters: np.ndarray
    delta: float
    epsilon: float
    seed: int

    @classmethod
    def empty(cls, delta: float, epsilon: float, seed: int) -> F2Sketch:
        return cls(np.zeros(f2_dims(delta, epsilon), dtype=np.int64), delta, epsilon, seed)

    @property
    def rows(self) -> int:
        return self.counters.shape[0]

    @property
    def buckets(self) -> int:
        return self.counters.shape[1]

    def update(self, x: int, v: int = 1) -> None:
        for r in range(self.rows):
            b, s = f2_hashes(x, r, self.seed, self.buckets)
            self.counters[r, b] += s * v

    def update_many(self, elements, v: int = 1) -> None:
        ids = as_ids(elements)
        n = ids.shape[0]
        if n == 0:
            return
        bidx, signs = f2_hashes_batch(ids, self.rows, self.seed, self.buckets)
        kernels.scatter_f2(
            self.counters.reshape(-1), self.rows, self.buckets,
            np.zeros(n, dtype=np.int64), np.arange(n, dtype=np.int64), bidx, signs, v,
        )

    def _check(self, other: F2Sketch) -> None:
        if (self.delta, self.epsilon, self.seed) != (other.delta, other.epsilon, other.seed):
            raise ConfigMismatch("F2 sketches differ in delta, epsilon or seed")

    def subtract(self, other: F2Sketch) -> F2Sketch:
        self._check(other)
        return F2Sketch(self.counters - other.counters, self.delta, self.epsilon, self.seed)

    def add(self, other: F2Sketch) -> F2Sketch:
        self._check(other)
        return F2Sketch(self.counters + other.counters, self.delta, self.epsilon, self.seed)

    __sub__ = subtract
    __add__ = add

    def row_estimates(self) -> np.ndarray:
        c = self.counters
        return np.einsum("rb,rb->r", c, c)

    def estimate(self) -> float:
        return float(np.median(self.row_estimates()))

    def __eq__(self, other):
        if not isinstance(other, F2Sketch):
            return NotImplemented
        return (self.delta, self.epsilon, self.seed) == (other.delta, other.epsilon, other.seed) and np.array_equal(
            self.counters, other.counters
        )


def f2_build(elements, delta: float, epsilon: float, seed: int) -> F2Sketch:
    s = F2Sketch.empty(delta, epsilon, seed)
    s.update_many(elements)
    return s


def f2_subtract(a: F2Sketch, b: F2Sketch) -> F2Sketch:
    return a.subtract(b)


def f2_estimate(s: F2Sketch) -> float:
    return s.estimate()
