"""Candidate bifurcation curves and their numeric validation against a locus.

Elimination overrepresents: every true bifurcation curve appears among the
leaves, but so may spurious ones (the cancelled variables were never asked
to lie on the unit circle).  :func:`validate_curves` sorts the candidates by
comparing each curve's real zero set with the fold set of the sampled
locus, the images of θ-grid points where the Hessian determinant of the
eigenphase changes sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy
from scipy import ndimage, spatial
from skimage import measure

from ..poly.gaussian import GaussianRational
from ..poly.multipoly import MultiPoly, PolyRing
from ..spectral import ParametricLocus

VALIDATED = "validated"
OVERREPRESENTED = "overrepresented"
UNKNOWN = "unknown"
STATUSES = (VALIDATED, OVERREPRESENTED, UNKNOWN)

DEFAULT_EPSILON = 0.02
DEFAULT_THRESHOLD = 0.8
CONTOUR_RESOLUTION = 512


@dataclass
class BifurcationCurve:
    """An algebraic curve ``f(X) = 0`` produced by elimination.

    Attributes
    ----------
    f : MultiPoly
        Polynomial in ``X_1..X_d`` only, scaled so the leading coefficient is 1.
    provenance : tuple of str
        Node ids from the system inputs down to the leaf, including any
        ``lambda=c`` substitution step.
    status : str
        One of ``validated``, ``overrepresented`` or ``unknown``; only
        :func:`validate_curves` changes it.
    score : float or None
        Fraction of sampled curve points near the locus fold set.
    other_paths : list of tuple of str
        Further provenance paths that produced the same polynomial.
    """

    f: MultiPoly
    provenance: tuple[str, ...] = ()
    status: str = UNKNOWN
    score: float | None = None
    other_paths: list[tuple[str, ...]] = field(default_factory=list)

    def __post_init__(self):
        ring = self.f.ring
        if self.f.is_constant():
            raise ValueError("a bifurcation curve needs a nonconstant polynomial")
        if any(v not in ring.spatial_variables for v in self.f.variables_present()):
            raise ValueError(f"curve polynomial must involve X variables only: {self.f}")
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")
        self.f = self.f.monic()

    @property
    def ring(self) -> PolyRing:
        return self.f.ring

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Evaluate ``f`` at points ``X`` of shape ``(..., d)``."""
        X = np.asarray(X, dtype=float)
        ring = self.ring
        values = self.f.evaluate_array({ring.X(k + 1): X[..., k] for k in range(ring.d)})
        return np.broadcast_to(values, X.shape[:-1])

    def contains(self, X: np.ndarray) -> np.ndarray:
        """Points on the same side of the curve as the origin (or on it).

        This is the natural region predicate for the closed curves the
        pipeline produces.  It needs real coefficients and ``f(0) != 0``.
        """
        if not self.f.is_real():
            raise ValueError("region predicate needs a curve with real coefficients")
        origin = self.f.constant_coefficient().re
        if origin == 0:
            raise ValueError("the origin lies on the curve; inside/outside is ambiguous")
        values = np.real(self(X))
        return values * float(origin) >= 0

    def to_json(self) -> dict:
        return {
            "polynomial": str(self.f),
            "terms": self.f.to_json(),
            "status": self.status,
            "score": self.score,
            "provenance": list(self.provenance),
            "other_paths": [list(p) for p in self.other_paths],
        }


# -- sympy bridge ------------------------------------------------------------------------------


def _sympy_symbols(ring: PolyRing) -> dict:
    return {v: sympy.Symbol(v.name) for v in ring.variables}


def to_sympy(p: MultiPoly):
    """Convert to a sympy expression with exact coefficients."""
    symbols = _sympy_symbols(p.ring)
    variables = p.ring.variables
    out = sympy.Integer(0)
    for exps, c in p.terms().items():
        coeff = sympy.Rational(int(c.re.numerator), int(c.re.denominator)) + sympy.I * sympy.Rational(
            int(c.im.numerator), int(c.im.denominator)
        )
        term = coeff
        for v, e in zip(variables, exps):
            if e:
                term *= symbols[v] ** e
        out += term
    return out


def from_sympy(ring: PolyRing, expr) -> MultiPoly:
    """Convert a polynomial sympy expression in the ring's variable names."""
    symbols = _sympy_symbols(ring)
    gens = [symbols[v] for v in ring.variables]
    poly = sympy.Poly(sympy.expand(expr), *gens)
    terms = {}
    for exps, c in poly.terms():
        re, im = c.as_real_imag()
        terms[tuple(int(e) for e in exps)] = GaussianRational(
            f"{sympy.Rational(re)}", f"{sympy.Rational(im)}"
        )
    return ring.from_terms(terms)


def irreducible_factors(p: MultiPoly) -> list[tuple[MultiPoly, int]]:
    """Factor over ℚ (real input) or ℚ(i) (otherwise) with sympy.

    Returns monic nonconstant factors with multiplicities; the scalar is dropped.
    """
    if p.is_constant():
        return []
    expr = to_sympy(p)
    if p.is_real():
        _, factors = sympy.factor_list(expr)
    else:
        _, factors = sympy.factor_list(expr, gaussian=True)
    out = []
    for f, m in factors:
        q = from_sympy(p.ring, f)
        if not q.is_constant():
            out.append((q.monic(), int(m)))
    return out


# -- validation --------------------------------------------------------------------------------


def fold_points(locus: ParametricLocus) -> np.ndarray:
    """Images of grid samples whose 8-neighbourhood contains both Hessian signs.

    Neighbourhoods are taken on the periodic θ grid, separately per branch.
    """
    res = locus.resolution
    step = 2 * np.pi / res
    idx = np.rint(locus.theta / step).astype(int) % res
    kernel = np.ones((3, 3), dtype=bool)
    chunks = []
    for b in np.unique(locus.branch):
        sel = locus.branch == b
        ii = idx[sel]
        signs = np.zeros((res, res), dtype=int)
        signs[ii[:, 0], ii[:, 1]] = locus.hessian_sign[sel]
        X = np.zeros((res, res, 2))
        X[ii[:, 0], ii[:, 1]] = locus.X[sel]
        pos, neg = signs > 0, signs < 0
        near_pos = ndimage.binary_dilation(np.pad(pos, 1, mode="wrap"), kernel)[1:-1, 1:-1]
        near_neg = ndimage.binary_dilation(np.pad(neg, 1, mode="wrap"), kernel)[1:-1, 1:-1]
        mask = (pos & near_neg) | (neg & near_pos)
        chunks.append(X[mask])
    if not chunks:
        return np.zeros((0, 2))
    return np.concatenate(chunks)


def curve_points(curve: BifurcationCurve, box: tuple[float, float, float, float], resolution: int = CONTOUR_RESOLUTION) -> np.ndarray:
    """Points of the real zero set inside ``box = (x0, x1, y0, y1)`` by marching squares.

    Curves with non-real coefficients are sampled on ``Re f = 0`` and kept
    only where ``|Im f|`` is small too, which typically leaves nothing.
    """
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    XX, YY = np.meshgrid(xs, ys, indexing="ij")
    values = curve(np.stack([XX, YY], axis=-1))
    real = np.real(values)
    if np.all(real > 0) or np.all(real < 0):
        return np.zeros((0, 2))
    pieces = measure.find_contours(real, 0.0)
    if not pieces:
        return np.zeros((0, 2))
    pts = np.concatenate(pieces)
    out = np.column_stack([np.interp(pts[:, 0], np.arange(resolution), xs), np.interp(pts[:, 1], np.arange(resolution), ys)])
    if not curve.f.is_real():
        scale = np.max(np.abs(values)) or 1.0
        out = out[np.abs(np.imag(curve(out))) <= 1e-6 * scale]
    return out


def validate_curves(
    curves: list[BifurcationCurve],
    locus: ParametricLocus,
    epsilon: float = DEFAULT_EPSILON,
    threshold: float = DEFAULT_THRESHOLD,
    resolution: int = CONTOUR_RESOLUTION,
) -> list[BifurcationCurve]:
    """Assign a status to each curve by comparing it with the locus fold set.

    A curve is ``validated`` when at least ``threshold`` of its contour
    points inside the locus bounding box lie within ``epsilon`` of a fold
    point, ``overrepresented`` otherwise, and ``unknown`` when its zero set
    misses the box.  The input curves are updated in place and returned.
    """
    if len(locus) == 0:
        raise ValueError("empty locus")
    lo = locus.X.min(axis=0)
    hi = locus.X.max(axis=0)
    pad = 0.02 * max(hi - lo)
    box = (lo[0] - pad, hi[0] + pad, lo[1] - pad, hi[1] + pad)
    folds = fold_points(locus)
    tree = spatial.cKDTree(folds) if len(folds) else None
    for curve in curves:
        pts = curve_points(curve, box, resolution)
        if len(pts) == 0:
            curve.status, curve.score = UNKNOWN, None
            continue
        if tree is None:
            near = np.zeros(len(pts), dtype=bool)
        else:
            dist, _ = tree.query(pts, distance_upper_bound=epsilon)
            near = dist <= epsilon
        curve.score = float(near.mean())
        curve.status = VALIDATED if curve.score >= threshold else OVERREPRESENTED
    return curves


__all__ = [
    "BifurcationCurve",
    "OVERREPRESENTED",
    "UNKNOWN",
    "VALIDATED",
    "curve_points",
    "fold_points",
    "from_sympy",
    "irreducible_factors",
    "to_sympy",
    "validate_curves",
]
