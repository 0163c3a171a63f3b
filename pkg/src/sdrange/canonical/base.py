"""Datasets, query ranges and the signed-decomposition contract shared by all structures."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from ..errors import DataError

ID_BITS = 48

# geometry name -> number of integer coordinates per item
GEOMETRIES = {"points1d": 1, "points2d": 2, "segments": 2, "grid1d": 1, "grid2d": 2}
STRUCTURE_GEOMETRY = {
    "tree1d": "points1d",
    "tree2d": "points2d",
    "segment": "segments",
    "grid1d": "grid1d",
    "grid2d": "grid2d",
}


class DataItem(NamedTuple):
    universe_id: int
    geometry: tuple[int, ...]
    dataset: str = ""


@dataclass
class Dataset:
    """Items of one named set: universe ids plus integer geometry, one row per item."""

    name: str
    ids: np.ndarray
    coords: np.ndarray
    geometry: str
    scale: float | None = None

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise DataError(f"unknown geometry {self.geometry!r}")
        self.ids = np.ascontiguousarray(self.ids, dtype=np.uint64)
        d = GEOMETRIES[self.geometry]
        self.coords = np.ascontiguousarray(self.coords, dtype=np.int64).reshape(-1, d)
        if self.coords.shape[0] != self.ids.shape[0]:
            raise DataError("ids and coords have different lengths")

    def __len__(self):
        return int(self.ids.shape[0])

    @classmethod
    def from_items(cls, name: str, items, geometry: str, **kw) -> Dataset:
        items = list(items)
        d = GEOMETRIES[geometry]
        ids = np.array([int(it[0]) for it in items], dtype=np.uint64)
        coords = np.array([tuple(it[1]) for it in items], dtype=np.int64).reshape(-1, d)
        return cls(name, ids, coords, geometry, **kw)

    def validate(self, id_bits: int | None = ID_BITS, allow_duplicates: bool = False) -> list[str]:
        """Raise :class:`DataError` on invalid items; returns warnings that were downgraded."""
        warnings = []
        if id_bits is not None and len(self) and int(self.ids.max()) >= 1 << id_bits:
            bad = int(self.ids[self.ids >= np.uint64(1 << id_bits)][0])
            raise DataError(f"set {self.name!r}: id {bad} does not fit in {id_bits} bits")
        uniq, counts = np.unique(self.ids, return_counts=True)
        if (counts > 1).any():
            msg = f"set {self.name!r}: duplicate id {int(uniq[counts > 1][0])}"
            if not allow_duplicates:
                raise DataError(msg)
            warnings.append(msg + " (decoding may fail)")
        if self.geometry == "segments" and len(self) and (self.coords[:, 0] > self.coords[:, 1]).any():
            i = int(np.flatnonzero(self.coords[:, 0] > self.coords[:, 1])[0])
            raise DataError(f"set {self.name!r}: segment of id {int(self.ids[i])} has lo > hi")
        if self.geometry.startswith("grid") and len(self) and (self.coords < 1).any():
            raise DataError(f"set {self.name!r}: grid indices are 1-based")
        return warnings

    def items(self) -> list[DataItem]:
        return [DataItem(int(i), tuple(int(v) for v in c), self.name) for i, c in zip(self.ids, self.coords)]


@dataclass(frozen=True)
class Interval1D:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval has lo > hi: [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Rect2D:
    xlo: int
    xhi: int
    ylo: int
    yhi: int

    def __post_init__(self):
        if self.xlo > self.xhi or self.ylo > self.yhi:
            raise ValueError(f"rectangle has lo > hi: {self}")


@dataclass(frozen=True)
class StabPoint:
    x: int


@dataclass(frozen=True)
class GridRect:
    """Closed block of 1-based grid cells from ``lo`` to ``hi`` (1 or 2 dimensions)."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) not in (1, 2):
            raise ValueError("grid ranges need matching 1- or 2-dimensional corners")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"grid range has lo > hi: {self.lo}-{self.hi}")


RangeQuery = Union[Interval1D, Rect2D, StabPoint, GridRect]


def contains(query: RangeQuery, ds: Dataset) -> np.ndarray:
    """Boolean mask of the items of ``ds`` inside the closed range (brute force)."""
    c = ds.coords
    if isinstance(query, Interval1D):
        return (c[:, 0] >= query.lo) & (c[:, 0] <= query.hi)
    if isinstance(query, Rect2D):
        return (c[:, 0] >= query.xlo) & (c[:, 0] <= query.xhi) & (c[:, 1] >= query.ylo) & (c[:, 1] <= query.yhi)
    if isinstance(query, StabPoint):
        return (c[:, 0] <= query.x) & (c[:, 1] >= query.x)
    if isinstance(query, GridRect):
        mask = np.ones(len(ds), dtype=bool)
        for axis, (a, b) in enumerate(zip(query.lo, query.hi)):
            mask &= (c[:, axis] >= a) & (c[:, axis] <= b)
        return mask
    raise TypeError(f"unsupported range {query!r}")


_NUM = r"\s*(-?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*"
_AXIS = re.compile(r"\s*([xy])\s*:\s*(?:\[" + _NUM + "," + _NUM + r"\]|" + _NUM + r")\s*")
_GRID = re.compile(r"^\s*\(([^)]*)\)\s*-\s*\(([^)]*)\)\s*$")


def _quantize(text: str, scale: float | None) -> int:
    v = float(text)
    if scale is not None:
        return int(round(v * scale))
    if not v.is_integer():
        raise ValueError(f"non-integral coordinate {text!r} needs a quantization scale")
    return int(v)


def parse_range(text: str, scale: float | None = None) -> RangeQuery:
    """Parse ``x:[a,b]``, ``x:[a,b],y:[c,d]``, ``x:7`` (stab) or ``(i,j)-(k,l)`` (grid)."""
    m = _GRID.match(text)
    if m:
        lo = tuple(int(v) for v in m.group(1).split(","))
        hi = tuple(int(v) for v in m.group(2).split(","))
        return GridRect(lo, hi)
    axes = {}
    rest = text
    for part in _split_axes(rest):
        am = _AXIS.fullmatch(part)
        if not am:
            raise ValueError(f"cannot parse range component {part!r}")
        name, a, b, point = am.groups()
        if name in axes:
            raise ValueError(f"axis {name} given twice")
        axes[name] = (_quantize(point, scale),) if point is not None else (_quantize(a, scale), _quantize(b, scale))
    if set(axes) == {"x"} and len(axes["x"]) == 1:
        return StabPoint(axes["x"][0])
    if set(axes) == {"x"}:
        return Interval1D(*axes["x"])
    if set(axes) == {"x", "y"} and len(axes["x"]) == 2 and len(axes["y"]) == 2:
        return Rect2D(*axes["x"], *axes["y"])
    raise ValueError(f"unsupported range {text!r}")


def _split_axes(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def format_range(q: RangeQuery) -> str:
    if isinstance(q, Interval1D):
        return f"x:[{q.lo},{q.hi}]"
    if isinstance(q, Rect2D):
        return f"x:[{q.xlo},{q.xhi}],y:[{q.ylo},{q.yhi}]"
    if isinstance(q, StabPoint):
        return f"x:{q.x}"
    return "(" + ",".join(map(str, q.lo)) + ")-(" + ",".join(map(str, q.hi)) + ")"


@dataclass
class SignedDecomposition:
    """A range as signed canonical-set terms; each in-range item is covered net once."""

    terms: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.terms)

    @property
    def plus(self) -> np.ndarray:
        return np.array([s for s, g in self.terms if g > 0], dtype=np.int64)

    @property
    def minus(self) -> np.ndarray:
        return np.array([s for s, g in self.terms if g < 0], dtype=np.int64)


class CanonicalStructure:
    """Static range structure whose canonical sets are slices of one ``members`` array.

    Subclasses set ``members`` (item positions), ``set_start`` and
    ``set_stop``, and implement :meth:`decompose`.
    """

    kind = ""
    semigroup = True

    dataset: Dataset
    members: np.ndarray
    set_start: np.ndarray
    set_stop: np.ndarray

    @property
    def set_count(self) -> int:
        return int(self.set_start.shape[0])

    def set_members(self, sid: int) -> np.ndarray:
        return self.members[self.set_start[sid]:self.set_stop[sid]]

    def set_elements(self, sid: int) -> np.ndarray:
        return self.dataset.ids[self.set_members(sid)]

    def set_sizes(self) -> np.ndarray:
        return self.set_stop - self.set_start

    def membership(self) -> tuple[np.ndarray, np.ndarray]:
        """All ``(set id, item position)`` pairs, grouped by set."""
        lengths = self.set_sizes()
        total = int(lengths.sum())
        rows = np.repeat(np.arange(self.set_count, dtype=np.int64), lengths)
        offs = np.repeat(self.set_start - (np.cumsum(lengths) - lengths), lengths)
        return rows, self.members[np.arange(total, dtype=np.int64) + offs]

    def decompose(self, query: RangeQuery) -> SignedDecomposition:
        raise NotImplementedError

    def state(self) -> tuple[dict, dict[str, np.ndarray]]:
        """JSON-able metadata and named arrays describing the topology."""
        raise NotImplementedError

    @classmethod
    def from_state(cls, dataset: Dataset, meta: dict, arrays: dict[str, np.ndarray]):
        raise NotImplementedError
