"""Set-difference range queries over canonical range-search structures."""

from ._backend import BACKEND
from .canonical import (
    F2Count,
    FixedM,
    GridRect,
    Interval1D,
    Rect2D,
    StabPoint,
    StrataCount,
    Variable,
    attach_sketches,
    build_structure,
    combine,
)
from .canonical.base import Dataset
from .container import load, save
from .engine import (
    SdCountAnswer,
    SdDiffAnswer,
    SdQuerySpec,
    naive_diff,
    query_count,
    query_diff,
)
from .errors import SdrangeError
from .ibf import Ibf, params_for

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dataset", "F2Count", "FixedM", "GridRect", "Ibf", "Interval1D", "Rect2D",
    "SdCountAnswer", "SdDiffAnswer", "SdQuerySpec", "SdrangeError", "StabPoint", "StrataCount",
    "Variable", "attach_sketches", "build_structure", "combine", "load", "naive_diff",
    "params_for", "query_count", "query_diff", "save",
]
