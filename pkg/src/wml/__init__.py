"""Weighted polynomial exponential sums: evaluation, sup estimates, discrepancy and experiments."""

from . import errors
from .discrepancy import (
    DiscrepancyResult,
    FiberDiscrepancy,
    PointSequence,
    brute_force_discrepancy,
    erdos_turan_bound,
    exact_discrepancy,
    polynomial_fractional_parts,
    sup_discrepancy_fiber,
)
from .polyfam import (
    ExponentReport,
    IntPolynomial,
    PolynomialFamily,
    WeightSpec,
    classical_family,
    exponent_report,
    individual_bound,
    parse_family,
    parse_polynomial,
    wronskian,
)
from .sumeval import SumValue, TorusVector, compare_engines, eval_points, eval_sum, shift_coefficients
from .supopt import BudgetSpec, SupEstimate, lipschitz_bounds, sup_fiber, sup_short

__version__ = "0.1.0"

__all__ = [
    "errors",
    "DiscrepancyResult",
    "FiberDiscrepancy",
    "PointSequence",
    "brute_force_discrepancy",
    "erdos_turan_bound",
    "exact_discrepancy",
    "polynomial_fractional_parts",
    "sup_discrepancy_fiber",
    "ExponentReport",
    "IntPolynomial",
    "PolynomialFamily",
    "WeightSpec",
    "classical_family",
    "exponent_report",
    "individual_bound",
    "parse_family",
    "parse_polynomial",
    "wronskian",
    "SumValue",
    "TorusVector",
    "compare_engines",
    "eval_points",
    "eval_sum",
    "shift_coefficients",
    "BudgetSpec",
    "SupEstimate",
    "lipschitz_bounds",
    "sup_fiber",
    "sup_short",
]
