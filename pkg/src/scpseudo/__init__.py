"""Pseudocodeword growth rates of spatially coupled protograph LDPC ensembles."""

__version__ = "0.1.0"

from .bounds import FreeGrowthRateReport, free_growth_rate_bounds, tailbiting_growth_rate, terminated_growth_rate
from .enumerator import GrowthCurve, GrowthOptions, growth_rate_at_delta, objective_F, zero_crossing
from .gf2 import Budget, Pseudocodeword, bec_pseudoweight, min_pseudoweight, project_pseudocodeword
from .protograph import (
    BaseMatrix,
    EdgeSpreading,
    TannerGraph,
    cover,
    design_rate,
    lift,
    tailbiting_base,
    terminated_base,
)

__all__ = [
    "BaseMatrix",
    "Budget",
    "EdgeSpreading",
    "FreeGrowthRateReport",
    "GrowthCurve",
    "GrowthOptions",
    "Pseudocodeword",
    "TannerGraph",
    "bec_pseudoweight",
    "cover",
    "design_rate",
    "free_growth_rate_bounds",
    "growth_rate_at_delta",
    "lift",
    "min_pseudoweight",
    "objective_F",
    "project_pseudocodeword",
    "tailbiting_base",
    "tailbiting_growth_rate",
    "terminated_base",
    "terminated_growth_rate",
    "zero_crossing",
]
