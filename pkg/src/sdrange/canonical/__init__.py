from .attach import (
    F2Count,
    FixedM,
    IbfBank,
    SketchedIndex,
    StrataCount,
    Variable,
    attach_sketches,
    build_structure,
    combine,
    mode_from_dict,
    mode_to_dict,
)
from .base import (
    GEOMETRIES,
    ID_BITS,
    STRUCTURE_GEOMETRY,
    CanonicalStructure,
    DataItem,
    Dataset,
    GridRect,
    Interval1D,
    Rect2D,
    SignedDecomposition,
    StabPoint,
    contains,
    format_range,
    parse_range,
)
from .prefix import PrefixGrid
from .rangetree import RangeTree1D, RangeTree2D, balanced_shape, tree_height
from .segment import SegmentTree

__all__ = [
    "F2Count", "FixedM", "IbfBank", "SketchedIndex", "StrataCount", "Variable",
    "attach_sketches", "build_structure", "combine", "mode_from_dict", "mode_to_dict",
    "GEOMETRIES", "ID_BITS", "STRUCTURE_GEOMETRY", "CanonicalStructure", "DataItem", "Dataset",
    "GridRect", "Interval1D", "Rect2D", "SignedDecomposition", "StabPoint",
    "contains", "format_range", "parse_range",
    "PrefixGrid", "RangeTree1D", "RangeTree2D", "balanced_shape", "tree_height", "SegmentTree",
]
