from .dissimilarity import DissimilarityReport, dissimilarities
from .f2 import F2Sketch, f2_build, f2_dims, f2_estimate, f2_subtract
from .sdr import (
    J_MIN,
    SdrFixed,
    SdrHier,
    ladder_top,
    level_config,
    level_epsilon,
    sdr_build,
    sdr_hier_build,
    sdr_hier_level,
    sdr_report,
)
from .strata import (
    StrataEstimator,
    layer_count,
    strata_build,
    strata_capacity,
    strata_config,
    strata_estimate,
)

__all__ = [
    "DissimilarityReport", "dissimilarities",
    "F2Sketch", "f2_build", "f2_dims", "f2_estimate", "f2_subtract",
    "J_MIN", "SdrFixed", "SdrHier", "ladder_top", "level_config", "level_epsilon",
    "sdr_build", "sdr_hier_build", "sdr_hier_level", "sdr_report",
    "StrataEstimator", "layer_count", "strata_build", "strata_capacity", "strata_config",
    "strata_estimate",
]
