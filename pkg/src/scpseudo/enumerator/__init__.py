"""Asymptotic pseudoweight growth rates of protograph ensembles."""

from .alphabet import EnumeratorBudgetError, WeightAlphabet, check_enumerator, check_factor
from .crossing import GrowthCurve, zero_crossing
from .exact import brute_force_average_count, exact_average_count
from .inner import inner_entropy_max
from .objective import TypeAssignment, objective_F
from .solver import GrowthOptions, GrowthPoint, growth_rate_at_delta

__all__ = [
    "EnumeratorBudgetError",
    "GrowthCurve",
    "GrowthOptions",
    "GrowthPoint",
    "TypeAssignment",
    "WeightAlphabet",
    "brute_force_average_count",
    "check_enumerator",
    "check_factor",
    "exact_average_count",
    "growth_rate_at_delta",
    "inner_entropy_max",
    "objective_F",
    "zero_crossing",
]
