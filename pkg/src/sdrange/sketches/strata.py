"""Strata estimator: IBF layers indexed by the trailing-zero depth of a sampling hash.

Layer ``i`` receives an element with probability ``2**-(i+1)``.  To
estimate ``|A xor B|`` the layers of the two estimators are subtracted
and decoded from the top layer down; the first layer that fails to decode
scales the count gathered so far by ``2**(i+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._backend import kernels
from ..errors import ConfigMismatch
from ..hashing import (
    HashConfig,
    as_ids,
    ceil_log2,
    cell_indices_batch,
    checksum_batch,
    default_lambda,
    strata_layer_batch,
)
from ..ibf import Ibf


def strata_capacity(delta: float, epsilon: float) -> int:
    """Per-layer capacity ``m' = ceil(4 delta**-2 (2 + log2(2/epsilon)) ln 2)``, at least 2."""
    if not 0 < delta < 1 or not 0 < epsilon < 1:
        raise ValueError(f"delta and epsilon must lie in (0, 1), got {delta}, {epsilon}")
    return max(2, math.ceil(4 / delta**2 * (2 + math.log2(2 / epsilon)) * math.log(2)))


def strata_config(m_prime: int, epsilon: float, seed: int) -> HashConfig:
    """Layer IBF with ``k = ceil(log2(2 m'/epsilon)) + 1`` and ``2 k m'`` cells."""
    k = ceil_log2(2 * m_prime / epsilon) + 1
    return HashConfig(seed, k, 2 * k * m_prime, default_lambda(k))


def layer_count(universe: int) -> int:
    return max(1, ceil_log2(universe))


@dataclass
class StrataEstimator:
    layers: np.ndarray  # (L, t, 3) uint64
    cfg: HashConfig
    m_prime: int
    epsilon: float
    universe: int

    @classmethod
    def empty(cls, m_prime: int, epsilon: float, universe: int, seed: int) -> StrataEstimator:
        cfg = strata_config(m_prime, epsilon, seed)
        layers = np.zeros((layer_count(universe), cfg.table_size, 3), dtype=np.uint64)
        return cls(layers, cfg, m_prime, epsilon, universe)

    @property
    def seed(self) -> int:
        return self.cfg.master_seed

    @property
    def layer_total(self) -> int:
        return self.layers.shape[0]

    def layer(self, i: int) -> Ibf:
        return Ibf(self.cfg, self.layers[i])

    def insert_many(self, elements, sign: int = 1) -> None:
        ids = as_ids(elements)
        if ids.shape[0] == 0:
            return
        top = int(ids.max())
        if top >= self.universe:
            raise ValueError(f"element id {top} is outside the universe [0, {self.universe})")
        rows = strata_layer_batch(ids, self.seed, self.layer_total)
        kernels.scatter_cells(
            self.layers.reshape(-1), self.cfg.table_size, rows,
            np.arange(ids.shape[0], dtype=np.int64),
            cell_indices_batch(ids, self.cfg), ids, checksum_batch(ids, self.cfg), sign,
        )

    def _check(self, other: StrataEstimator) -> None:
        if (self.cfg, self.m_prime, self.universe) != (other.cfg, other.m_prime, other.universe):
            raise ConfigMismatch("strata estimators differ in configuration or seed")

    def subtract(self, other: StrataEstimator) -> StrataEstimator:
        self._check(other)
        return StrataEstimator(self.layers - other.layers, self.cfg, self.m_prime, self.epsilon, self.universe)

    def add(self, other: StrataEstimator) -> StrataEstimator:
        self._check(other)
        return StrataEstimator(self.layers + other.layers, self.cfg, self.m_prime, self.epsilon, self.universe)

    __sub__ = subtract
    __add__ = add

    def __eq__(self, other):
        if not isinstance(other, StrataEstimator):
            return NotImplemented
        return (self.cfg, self.m_prime, self.universe) == (other.cfg, other.m_prime, other.universe) and np.array_equal(
            self.layers, other.layers
        )

    def estimate(self) -> float:
        """Size estimate of the signed contents (use on a difference)."""
        d = 0
        for i in range(self.layer_total - 1, -1, -1):
            res = self.layer(i).list_items(self.m_prime)
            if not res.complete:
                return float(2 ** (i + 1) * d)
            d += len(res)
        return float(d)


def strata_build(elements, m_prime: int, epsilon: float, universe: int, seed: int) -> StrataEstimator:
    s = StrataEstimator.empty(m_prime, epsilon, universe, seed)
    s.insert_many(elements)
    return s


def strata_estimate(a: StrataEstimator, b: StrataEstimator) -> float:
    return a.subtract(b).estimate()
