"""Exact polynomial arithmetic over the Gaussian rationals ℚ(i)."""

from .budget import UNLIMITED, Budget, BudgetExceeded
from .factors import (
    default_candidates,
    gcd,
    normalize_scalar,
    primitive_normalize,
    reduce_multiplicity,
    square_free_part,
    strip_known_factors,
)
from .gaussian import GaussianRational
from .groebner import BlockOrder, LexOrder, buchberger, elimination_polynomials, is_groebner_basis, reduce_by
from .multipoly import AUX, LAMBDA, MultiPoly, NotExactDivision, PolyRing, Variable
from .resultant import leading_coefficients_vanish, scalar_resultant, sylvester_resultant

__all__ = [
    "AUX",
    "BlockOrder",
    "Budget",
    "BudgetExceeded",
    "GaussianRational",
    "LAMBDA",
    "LexOrder",
    "MultiPoly",
    "NotExactDivision",
    "PolyRing",
    "UNLIMITED",
    "Variable",
    "buchberger",
    "default_candidates",
    "elimination_polynomials",
    "gcd",
    "is_groebner_basis",
    "leading_coefficients_vanish",
    "normalize_scalar",
    "primitive_normalize",
    "reduce_by",
    "reduce_multiplicity",
    "scalar_resultant",
    "square_free_part",
    "strip_known_factors",
    "sylvester_resultant",
]
