"""Degenerate-critical-point systems, their elimination and curve validation."""

from .chain import FactorNode, FactorTree, eliminate_chain
from .curves import BifurcationCurve, validate_curves
from .groebner_route import GroebnerBudgetExceeded, groebner_eliminate
from .system import FULL, NAIVE, PolySystem, build_system, exp_hessian, preferred_mode, stationary_equations

__all__ = [
    "BifurcationCurve",
    "FULL",
    "FactorNode",
    "FactorTree",
    "GroebnerBudgetExceeded",
    "NAIVE",
    "PolySystem",
    "build_system",
    "eliminate_chain",
    "exp_hessian",
    "groebner_eliminate",
    "preferred_mode",
    "stationary_equations",
    "validate_curves",
]
