"""Published polynomials for the five example walks.

Each fixture records the nontrivial characteristic polynomial, its trivial
(λ-only) factors, the bifurcation curves the elimination should produce and
a containment bound for the sampled locus where one is known.  Polynomials
are stored as text in the variable names ``lambda, x1, x2, X1, X2`` and
compared after :func:`~qwalkcurves.poly.factors.primitive_normalize`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .poly.factors import primitive_normalize
from .poly.multipoly import MultiPoly, PolyRing

REQUIRED = "required"
STATUS_ONLY = "status-only"


@dataclass(frozen=True)
class CurveFixture:
    """An expected leaf polynomial.

    ``kind`` is ``required`` (must appear among the leaves) or
    ``status-only`` (must appear, but its validation status is only
    reported because its legitimacy is uncertain).
    """

    text: str
    kind: str = REQUIRED


@dataclass(frozen=True)
class WalkFixture:
    """Expected results for one zoo walk.

    Attributes
    ----------
    char_poly : str
        Nontrivial characteristic polynomial.
    trivial : str
        Product of the trivial factors (``"1"`` when there are none).
    curves : tuple of CurveFixture
    curve_mode : str
        Elimination route that reproduces the curves (``full`` or ``naive``).
    containment : tuple of (str, float) or None
        ``(q, bound)`` such that every locus sample satisfies ``q(X) <= bound``.
    """

    char_poly: str
    trivial: str
    curves: tuple[CurveFixture, ...]
    curve_mode: str
    containment: tuple[str, float] | None = None
    notes: tuple[str, ...] = field(default=())


FIXTURES: dict[str, WalkFixture] = {
    "grover4": WalkFixture(
        char_poly="2*x1*x2*lambda^2 + (x1*x2 + 1)*(x1 + x2)*lambda + 2*x1*x2",
        trivial="lambda^2 - 1",
        curves=(CurveFixture("2*X1^2 + 2*X2^2 - 1"),),
        curve_mode="full",
        containment=("2*X1^2 + 2*X2^2", 1.0),
    ),
    "grover5": WalkFixture(
        char_poly=(
            "5*x1*x2*lambda^4 + (3*x1^2*x2 + 3*x1*x2^2 + 8*x1*x2 + 3*x1 + 3*x2)*lambda^3"
            " + (x1^2*x2^2 + 4*x1^2*x2 + x1^2 + 4*x1*x2^2 + 10*x1*x2 + 4*x1 + x2^2 + 4*x2 + 1)*lambda^2"
            " + (3*x1^2*x2 + 3*x1*x2^2 + 8*x1*x2 + 3*x1 + 3*x2)*lambda + 5*x1*x2"
        ),
        trivial="lambda - 1",
        curves=(
            CurveFixture(
                "405*(X1^8 + X2^8) - 648*(X1^6 + X2^6) + (378 - 180*X1^2*X2^2)*(X1^4 + X2^4)"
                " + (1416*X1^2*X2^2 - 96)*(X1^2 + X2^2) + 830*X1^4*X2^4 - 596*X1^2*X2^2 + 9"
            ),
        ),
        curve_mode="naive",
        notes=("the printed λ² coefficient lists x2^2 twice; the single term is used",),
    ),
    "triangular": WalkFixture(
        char_poly="3*x1*x2^2*lambda^3 + x2*(x1^2 + x1*x2^2 + 1)*lambda^2 - (x1^2*x2^2 + x1 + x2^2)*lambda - 3*x1*x2",
        trivial="1",
        curves=(CurveFixture("4*X1^2 + 3*X2^2 + 2*X2 - 1"),),
        curve_mode="naive",
    ),
    "hexagonal": WalkFixture(
        char_poly=(
            "9*x1^3*x2^2*lambda^4 - (4*x1^6*x2^3 + 4*x1^6*x2 + 4*x1^3*x2^4 - 6*x1^3*x2^2"
            " + 4*x1^3 + 4*x2^3 + 4*x2)*lambda^2 + 9*x1^3*x2^2"
        ),
        trivial="lambda^2 - 1",
        curves=(CurveFixture("X1^2 + 3*X2^2 - 2"), CurveFixture("X1^2 + 3*X2^2 - 1", STATUS_ONLY)),
        curve_mode="naive",
        containment=("X1^2 + 3*X2^2", 2.0),
    ),
    "hadamard4": WalkFixture(
        char_poly=(
            "2*x1*x2*lambda^4 - (x1*x2 + 1)*(x1 - x2)*lambda^3 - (x1*x2 + 1)^2*lambda^2"
            " + (x1*x2 + 1)*(x1 - x2)*lambda + 2*x1*x2"
        ),
        trivial="1",
        curves=(
            CurveFixture("3*X1^2 - 2*X1*X2 + 2*X1 + 3*X2^2 - 2*X2"),
            CurveFixture("3*X1^2 - 2*X1*X2 - 2*X1 + 3*X2^2 + 2*X2"),
        ),
        curve_mode="naive",
    ),
}


def fixture(name: str) -> WalkFixture:
    """The fixture for a zoo walk name (``KeyError`` otherwise)."""
    return FIXTURES[name]


def parse(text: str, ring: PolyRing | None = None) -> MultiPoly:
    """Parse fixture text and normalize it to primitive form."""
    return primitive_normalize((ring or PolyRing(2)).parse(text))


__all__ = ["CurveFixture", "FIXTURES", "REQUIRED", "STATUS_ONLY", "WalkFixture", "fixture", "parse"]
