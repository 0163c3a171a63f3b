"""Attaching sketches to every canonical set of a structure.

Sketches of one kind share a hash configuration, so they are stored
stacked: ``(sets, t, 3)`` IBF cells, ``(sets, R, B)`` F2 counters, or
``(sets, L, t, 3)`` strata layers.  Combining a signed decomposition is a
signed row sum.  Prefix grids build per-cell sketches and accumulate them;
every other structure scatters its (set, item) membership pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import os
from typing import Union

import numpy as np

from .._backend import kernels
from ..errors import ConfigMismatch, ModeMismatch
from ..hashing import HashConfig, ceil_log2, cell_indices_batch, checksum_batch, f2_hashes_batch, strata_layer_batch
from ..ibf import Ibf, params_for
from ..sketches.f2 import F2Sketch, f2_dims
from ..sketches.sdr import J_MIN, SdrFixed, SdrHier, level_config, level_epsilon
from ..sketches.strata import StrataEstimator, layer_count, strata_capacity, strata_config
from .base import CanonicalStructure, Dataset, SignedDecomposition
from .prefix import PrefixGrid
from .rangetree import RangeTree1D, RangeTree2D
from .segment import SegmentTree

STRUCTURES = {
    "tree1d": RangeTree1D,
    "tree2d": RangeTree2D,
    "segment": SegmentTree,
    "grid1d": PrefixGrid,
    "grid2d": PrefixGrid,
}


DEFAULT_MAX_BYTES = 3 << 30


def _zeros(shape, dtype) -> np.ndarray:
    """``np.zeros`` that refuses tables beyond ``SDRANGE_MAX_BYTES`` (default 3 GiB)."""
    limit = int(os.environ.get("SDRANGE_MAX_BYTES", DEFAULT_MAX_BYTES))
    need = int(np.prod(shape, dtype=np.int64)) * np.dtype(dtype).itemsize
    if need > limit:
        raise MemoryError(
            f"sketch tables need {need / 2**30:.2f} GiB (shape {tuple(shape)}), over the "
            f"{limit / 2**30:.2f} GiB limit; use a smaller universe, capacity or dataset, or raise SDRANGE_MAX_BYTES"
        )
    return np.zeros(shape, dtype=dtype)


def build_structure(dataset: Dataset, kind: str, dims=None) -> CanonicalStructure:
    if kind not in STRUCTURES:
        raise ValueError(f"unknown structure kind {kind!r}; choose from {sorted(STRUCTURES)}")
    cls = STRUCTURES[kind]
    if cls is PrefixGrid:
        grid = PrefixGrid(dataset, dims)
        if grid.kind != kind:
            raise ValueError(f"{kind} needs {kind[-2]} grid coordinates per item")
        return grid
    return cls(dataset)


@dataclass(frozen=True)
class FixedM:
    m: int
    epsilon: float
    name = "fixed"


@dataclass(frozen=True)
class Variable:
    epsilon: float
    j_min: int = J_MIN
    j_max: int | None = None
    name = "variable"


@dataclass(frozen=True)
class F2Count:
    delta: float
    epsilon: float
    name = "f2"


@dataclass(frozen=True)
class StrataCount:
    delta: float
    epsilon: float
    universe: int = 1 << 48
    name = "strata"


SketchMode = Union[FixedM, Variable, F2Count, StrataCount]


def mode_to_dict(mode: SketchMode) -> dict:
    d = {"name": mode.name}
    d.update(mode.__dict__)
    return d


def mode_from_dict(d: dict) -> SketchMode:
    d = dict(d)
    cls = {"fixed": FixedM, "variable": Variable, "f2": F2Count, "strata": StrataCount}[d.pop("name")]
    return cls(**d)


def _validate_mode(mode: SketchMode) -> None:
    eps = mode.epsilon
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    if isinstance(mode, (F2Count, StrataCount)) and not 0 < mode.delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {mode.delta}")
    if isinstance(mode, FixedM) and mode.m < 1:
        raise ValueError(f"m must be at least 1, got {mode.m}")


@dataclass
class IbfBank:
    """Stacked IBFs of one config for a subset of canonical sets."""

    cfg: HashConfig
    cells: np.ndarray
    row_of: np.ndarray  # set id -> row, -1 when the set has no stored sketch

    def rows(self, sids: np.ndarray) -> np.ndarray:
        return self.row_of[sids] if sids.shape[0] else sids


@dataclass
class SketchedIndex:
    """A canonical structure with a sketch on every canonical set."""

    structure: CanonicalStructure
    mode: SketchMode
    seed: int
    banks: dict
    tops: np.ndarray | None = None  # variable mode: ladder top per set

    @property
    def dataset(self) -> Dataset:
        return self.structure.dataset

    @property
    def kind(self) -> str:
        return self.structure.kind

    def check_compatible(self, other: SketchedIndex) -> None:
        if self.seed != other.seed:
            raise ConfigMismatch(f"indexes use different master seeds ({self.seed} vs {other.seed})")
        if self.kind != other.kind:
            raise ConfigMismatch(f"indexes use different structures ({self.kind} vs {other.kind})")
        if self.mode != other.mode:
            raise ConfigMismatch(f"indexes use different sketch modes ({self.mode} vs {other.mode})")

    def require(self, *modes) -> None:
        if not isinstance(self.mode, modes):
            want = "/".join(m.name for m in modes)
            raise ModeMismatch(f"index was built in {self.mode.name} mode, query needs {want}")

    def cell_total(self) -> int:
        return sum(int(b.cells.shape[0] * b.cells.shape[1]) for b in self.banks.values() if isinstance(b, IbfBank))

    def sketch(self, sid: int):
        """The sketch stored for canonical set ``sid`` (a fresh object over copied data)."""
        mode = self.mode
        if isinstance(mode, FixedM):
            bank = self.banks["ibf"]
            return SdrFixed(Ibf(bank.cfg, bank.cells[bank.row_of[sid]].copy()), mode.m, mode.epsilon)
        if isinstance(mode, Variable):
            levels = {}
            eps = level_epsilon(mode.epsilon, mode.j_min, mode.j_max)
            for j in range(mode.j_min, int(self.tops[sid]) + 1):
                s = self.level_sketch(sid, j)
                levels[j] = SdrFixed(Ibf(s.ibf.cfg, s.ibf.cells.copy()), 2**j, eps)
            return SdrHier(levels, mode.epsilon, self.seed, mode.j_min, mode.j_max,
                           self.structure.set_elements(sid))
        if isinstance(mode, F2Count):
            return F2Sketch(self.banks["f2"][sid].copy(), mode.delta, mode.epsilon, self.seed)
        bank = self.banks["strata"]
        return StrataEstimator(bank["layers"][sid].copy(), bank["cfg"], bank["m_prime"], mode.epsilon, mode.universe)

    def level_sketch(self, sid: int, j: int) -> SdrFixed:
        """Level ``j`` for set ``sid``: stored if within the ladder, else built from its elements."""
        self.require(Variable)
        bank = self.banks.get(j)
        mode = self.mode
        eps = level_epsilon(mode.epsilon, mode.j_min, mode.j_max)
        if bank is not None and bank.row_of[sid] >= 0:
            return SdrFixed(Ibf(bank.cfg, bank.cells[bank.row_of[sid]]), 2**j, eps)
        cfg = level_config(j, mode.epsilon, self.seed, mode.j_min, mode.j_max)
        return SdrFixed(Ibf.from_elements(self.structure.set_elements(sid), cfg), 2**j, eps)


def resolve_mode(mode: SketchMode, structure: CanonicalStructure) -> SketchMode:
    if isinstance(mode, Variable) and mode.j_max is None:
        return replace(mode, j_max=max(mode.j_min, ceil_log2(len(structure.dataset)) + 1))
    return mode


def _pairs(structure: CanonicalStructure, row_of: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows, pos = structure.membership()
    r = row_of[rows]
    keep = r >= 0
    return r[keep], pos[keep]


def _ibf_rows(structure: CanonicalStructure, cfg: HashConfig, row_of: np.ndarray, n_rows: int) -> np.ndarray:
    ids = structure.dataset.ids
    idx = cell_indices_batch(ids, cfg)
    g = checksum_batch(ids, cfg)
    t = cfg.table_size
    if isinstance(structure, PrefixGrid):
        n = len(structure.dataset)
        per_cell = _zeros((structure.cell_count, t, 3), np.uint64)
        kernels.scatter_cells(per_cell.reshape(-1), t, structure.cell_of, np.arange(n, dtype=np.int64), idx, ids, g, 1)
        full = structure.prefix_accumulate(per_cell)
        keep = np.flatnonzero(row_of >= 0)
        out = _zeros((n_rows, t, 3), np.uint64)
        out[row_of[keep]] = full[keep]
        return out
    cells = _zeros((n_rows, t, 3), np.uint64)
    rows, pos = _pairs(structure, row_of)
    kernels.scatter_cells(cells.reshape(-1), t, rows, pos, idx, ids, g, 1)
    return cells


def attach_sketches(structure: CanonicalStructure, mode: SketchMode, seed: int) -> SketchedIndex:
    """Build the sketch of every canonical set, all from the shared ``seed``."""
    _validate_mode(mode)
    mode = resolve_mode(mode, structure)
    n_sets = structure.set_count
    everyone = np.arange(n_sets, dtype=np.int64)
    ids = structure.dataset.ids
    grid = isinstance(structure, PrefixGrid)

    if isinstance(mode, FixedM):
        cfg = params_for(mode.m, mode.epsilon, seed)
        return SketchedIndex(structure, mode, seed, {"ibf": IbfBank(cfg, _ibf_rows(structure, cfg, everyone, n_sets), everyone)})

    if isinstance(mode, Variable):
        sizes = structure.set_sizes()
        tops = np.array([max(mode.j_min, ceil_log2(int(s))) for s in sizes], dtype=np.int64)
        banks = {}
        top = int(tops.max()) if n_sets else mode.j_min
        for j in range(mode.j_min, top + 1):
            # a set no larger than the level capacity is cheaper to insert at query time
            have = (tops >= j) & (sizes > 2**j)
            row_of = np.full(n_sets, -1, dtype=np.int64)
            row_of[have] = np.arange(int(have.sum()), dtype=np.int64)
            cfg = level_config(j, mode.epsilon, seed, mode.j_min, mode.j_max)
            banks[j] = IbfBank(cfg, _ibf_rows(structure, cfg, row_of, int(have.sum())), row_of)
        return SketchedIndex(structure, mode, seed, banks, tops)

    if isinstance(mode, F2Count):
        rows_n, buckets = f2_dims(mode.delta, mode.epsilon)
        bidx, signs = f2_hashes_batch(ids, rows_n, seed, buckets)
        if grid:
            per_cell = _zeros((structure.cell_count, rows_n, buckets), np.int64)
            kernels.scatter_f2(per_cell.reshape(-1), rows_n, buckets, structure.cell_of,
                               np.arange(len(ids), dtype=np.int64), bidx, signs, 1)
            counters = structure.prefix_accumulate(per_cell)
        else:
            counters = _zeros((n_sets, rows_n, buckets), dtype=np.int64)
            rows, pos = structure.membership()
            kernels.scatter_f2(counters.reshape(-1), rows_n, buckets, rows, pos, bidx, signs, 1)
        return SketchedIndex(structure, mode, seed, {"f2": counters})

    m_prime = strata_capacity(mode.delta, mode.epsilon)
    cfg = strata_config(m_prime, mode.epsilon, seed)
    n_layers = layer_count(mode.universe)
    if len(ids) and int(ids.max()) >= mode.universe:
        raise ValueError(f"element id {int(ids.max())} is outside the universe [0, {mode.universe})")
    layer = strata_layer_batch(ids, seed, n_layers)
    idx = cell_indices_batch(ids, cfg)
    g = checksum_batch(ids, cfg)
    t = cfg.table_size
    if grid:
        per_cell = _zeros((structure.cell_count, n_layers, t, 3), np.uint64)
        kernels.scatter_cells(per_cell.reshape(-1), t, structure.cell_of * n_layers + layer,
                              np.arange(len(ids), dtype=np.int64), idx, ids, g, 1)
        layers = structure.prefix_accumulate(per_cell)
    else:
        layers = _zeros((n_sets, n_layers, t, 3), np.uint64)
        rows, pos = structure.membership()
        kernels.scatter_cells(layers.reshape(-1), t, rows * n_layers + layer[pos], pos, idx, ids, g, 1)
    return SketchedIndex(structure, mode, seed, {"strata": {"cfg": cfg, "m_prime": m_prime, "layers": layers}})


def _signed_sum(stack: np.ndarray, plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    acc = stack[plus].sum(axis=0, dtype=stack.dtype)
    if minus.shape[0]:
        acc -= stack[minus].sum(axis=0, dtype=stack.dtype)
    return acc


def combine(index: SketchedIndex, decomposition: SignedDecomposition, level: int | None = None):
    """Signed sum of the canonical sketches named by ``decomposition``.

    By linearity the result is the sketch of exactly the items in the
    range.  In variable mode ``level`` picks the ladder rung; sets whose
    ladder stops below it contribute by direct insertion of their elements.
    """
    plus, minus = decomposition.plus, decomposition.minus
    mode = index.mode
    if isinstance(mode, FixedM):
        bank = index.banks["ibf"]
        return Ibf(bank.cfg, _signed_sum(bank.cells, bank.rows(plus), bank.rows(minus)))
    if isinstance(mode, Variable):
        if level is None:
            raise ModeMismatch("variable-mode combination needs a ladder level")
        if level < mode.j_min:
            raise ValueError(f"level {level} is below j_min={mode.j_min}")
        bank = index.banks.get(level)
        cfg = level_config(level, mode.epsilon, index.seed, mode.j_min, mode.j_max)
        if bank is None:
            ibf = Ibf(cfg)
            p_rows = m_rows = np.empty(0, dtype=np.int64)
            p_miss, m_miss = plus, minus
        else:
            p_all, m_all = bank.rows(plus), bank.rows(minus)
            p_rows, m_rows = p_all[p_all >= 0], m_all[m_all >= 0]
            p_miss, m_miss = plus[p_all < 0], minus[m_all < 0]
            ibf = Ibf(cfg, _signed_sum(bank.cells, p_rows, m_rows))
        st = index.structure
        for miss, sign in ((p_miss, 1), (m_miss, -1)):
            if miss.shape[0]:
                ibf.insert_many(np.concatenate([st.set_elements(int(s)) for s in miss]), sign)
        return ibf
    if isinstance(mode, F2Count):
        return F2Sketch(_signed_sum(index.banks["f2"], plus, minus), mode.delta, mode.epsilon, index.seed)
    bank = index.banks["strata"]
    return StrataEstimator(_signed_sum(bank["layers"], plus, minus), bank["cfg"], bank["m_prime"],
                           mode.epsilon, mode.universe)
