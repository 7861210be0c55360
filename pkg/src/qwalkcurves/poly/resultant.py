"""Sylvester resultants.

Two exact routes are provided and cross-checked in the tests:

``bareiss``
    fraction-free (Bareiss) elimination directly on the Sylvester matrix whose
    entries are polynomials.  Simple; fine for small inputs.
``interpolate``
    dense evaluation/interpolation: the remaining variables are specialized at
    integer points, each specialized Sylvester matrix is an integer matrix whose
    determinant is taken by integer Bareiss, and the resultant is rebuilt by
    Newton interpolation one variable at a time.  The number of points per
    variable comes from the classical degree bound
    ``deg_w Res <= deg_v(g) deg_w(f) + deg_v(f) deg_w(g)``.  Only available for
    real coefficients.

The Sylvester matrix is the standard ``(m + n) x (m + n)`` one for degrees
``m = deg_v f`` and ``n = deg_v g``.
"""

from __future__ import annotations

from math import lcm, prod
from typing import Callable, Sequence

from gmpy2 import mpq, mpz

from .budget import Budget
from .gaussian import GaussianRational
from .multipoly import LAMBDA, MultiPoly, PolyRing, Variable

_SLOT = (1 << 16) - 1


def coefficient_list(p: MultiPoly, v: Variable | str) -> list[MultiPoly]:
    """Coefficients of ``p`` in ``v``, highest degree first."""
    parts = p.coefficients_in(v)
    deg = max(parts) if parts else 0
    zero = p.ring.zero
    return [parts.get(k, zero) for k in range(deg, -1, -1)]


def sylvester_matrix(fc: Sequence, gc: Sequence, zero) -> list[list]:
    """Sylvester matrix from descending coefficient lists ``fc`` (degree m) and ``gc`` (degree n)."""
    m = len(fc) - 1
    n = len(gc) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([zero] * i + list(fc) + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + list(gc) + [zero] * (size - n - 1 - i))
    return rows


def bareiss_determinant(
    matrix: list[list],
    exact_div: Callable,
    is_zero: Callable = lambda a: not a,
    one=1,
    check: Callable[[], None] | None = None,
):
    """Fraction-free determinant by Bareiss elimination.

    ``exact_div(a, b)`` must return the exact quotient; every division the
    algorithm performs is exact in an integral domain.
    """
    a = [list(row) for row in matrix]
    size = len(a)
    if size == 0:
        return one
    sign = 1
    prev = one
    for k in range(size - 1):
        if check is not None:
            check()
        if is_zero(a[k][k]):
            for r in range(k + 1, size):
                if not is_zero(a[r][k]):
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return a[k][k] * 0
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, size):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, size):
                val = akk * rowi[j] - aik * rowk[j]
                rowi[j] = exact_div(val, prev) if not is_zero(val) else val
            rowi[k] = aik * 0
        prev = akk
    det = a[size - 1][size - 1]
    return det if sign > 0 else -det


def _validate(f: MultiPoly, g: MultiPoly, v: Variable | str) -> tuple[int, int]:
    if f.ring is not g.ring:
        raise ValueError("polynomials belong to different rings")
    m = f.degree(v)
    n = g.degree(v)
    if m < 1 or n < 1:
        name = v if isinstance(v, str) else v.name
        raise ValueError(
            f"resultant needs positive degree in {name}: got degrees {m} and {n}"
        )
    return m, n


def degree_bounds(f: MultiPoly, g: MultiPoly, v: Variable | str) -> dict[Variable, int]:
    """Per-variable a priori degree bounds of ``Res(f, g, v)``."""
    ring = f.ring
    m, n = f.degree(v), g.degree(v)
    v = Variable.parse(v) if isinstance(v, str) else v
    out = {}
    for w in ring.variables:
        if w == v:
            continue
        b = n * max(f.degree(w), 0) + m * max(g.degree(w), 0)
        if b:
            out[w] = b
    return out


def total_degree_bound(f: MultiPoly, g: MultiPoly, v: Variable | str) -> int:
    ring = f.ring
    i = ring.index(v)
    s = ring.shifts[i]

    def tdeg_without_v(p):
        best = 0
        for mono in p.monomials():
            best = max(best, ring.total_degree(mono) - ((mono >> s) & _SLOT))
        return best

    return g.degree(v) * tdeg_without_v(f) + f.degree(v) * tdeg_without_v(g)


def sylvester_resultant(
    f: MultiPoly,
    g: MultiPoly,
    v: Variable | str,
    budget: Budget | None = None,
    method: str = "auto",
) -> MultiPoly:
    """Resultant of ``f`` and ``g`` with respect to ``v``.

    Parameters
    ----------
    f, g : MultiPoly
        Both must have positive degree in ``v``.
    v : Variable or str
        Variable to eliminate.
    budget : Budget, optional
        ``max_degree`` caps the total-degree bound of the result and
        ``max_terms`` caps the size of the dense interpolation box.
    method : {"auto", "bareiss", "interpolate"}
        ``auto`` interpolates when coefficients are real and falls back to
        polynomial Bareiss otherwise.

    Raises
    ------
    ValueError
        If either input has degree 0 in ``v``.
    BudgetExceeded
        If the a priori size estimates exceed the budget, or time runs out.
    """
    m, n = _validate(f, g, v)
    budget = budget or Budget()
    if budget._deadline is None:
        budget = budget.start()
    v = Variable.parse(v) if isinstance(v, str) else v
    budget.check_degree(total_degree_bound(f, g, v), "resultant")
    bounds = degree_bounds(f, g, v)
    box = prod(b + 1 for b in bounds.values())
    budget.check_terms(box, "resultant interpolation box")

    if method == "auto":
        method = "interpolate" if (f.is_real() and g.is_real()) else "bareiss"
    if method == "bareiss":
        return _resultant_bareiss(f, g, v, budget)
    if method == "interpolate":
        if not (f.is_real() and g.is_real()):
            raise ValueError("interpolation route needs real coefficients")
        return _resultant_interpolate(f, g, v, bounds, budget)
    raise ValueError(f"unknown resultant method {method!r}")


def _resultant_bareiss(f: MultiPoly, g: MultiPoly, v: Variable, budget: Budget) -> MultiPoly:
    ring = f.ring
    mat = sylvester_matrix(coefficient_list(f, v), coefficient_list(g, v), ring.zero)

    def div(a, b):
        q = a.exquo(b)
        budget.check_terms(len(q), "Bareiss intermediate")
        return q

    return bareiss_determinant(
        mat, div, is_zero=lambda a: a.is_zero(), one=ring.one, check=budget.check_time
    )


def _int_bareiss(mat: list[list[int]]) -> int:
    return bareiss_determinant(mat, lambda a, b: a // b, one=mpz(1))


def _to_integer_rows(p: MultiPoly, v: Variable, others: list[int]) -> tuple[list[dict], int]:
    """Descending v-coefficients of ``den * p`` as ``{exps over others: int}`` dicts."""
    ring = p.ring
    den = p.denominator_lcm()
    vi = ring.index(v)
    sv = ring.shifts[vi]
    deg = p.degree(v)
    rows: list[dict] = [dict() for _ in range(deg + 1)]
    for mono, c in p._re.items():
        e = (mono >> sv) & _SLOT
        key = tuple((mono >> ring.shifts[i]) & _SLOT for i in others)
        rows[deg - e][key] = mpz(c * den)
    return rows, den


def _interp_points(count: int) -> list[int]:
    pts = [0]
    k = 1
    while len(pts) < count:
        pts.append(k)
        if len(pts) < count:
            pts.append(-k)
        k += 1
    return pts


def _newton_coefficients(points: list[int], values: list) -> list:
    """Monomial-basis coefficients (ascending) of the interpolant through the data."""
    n = len(points)
    coef = [mpq(val) for val in values]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (points[i] - points[i - j])
    # expand Newton form sum coef[k] * prod_{i<k} (w - points[i]) into monomials
    poly = [coef[n - 1]]
    for k in range(n - 2, -1, -1):
        a = points[k]
        new = [mpq(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            new[i + 1] += c
            new[i] -= a * c
        new[0] += coef[k]
        poly = new
    return poly


def _resultant_interpolate(
    f: MultiPoly, g: MultiPoly, v: Variable, bounds: dict[Variable, int], budget: Budget
) -> MultiPoly:
    ring = f.ring
    # innermost level = the variable with the largest bound, so that the
    # expensive outer specializations happen on the fewest points
    order = sorted(bounds, key=lambda w: bounds[w])
    others = [ring.index(w) for w in order]
    frows, df = _to_integer_rows(f, v, others)
    grows, dg = _to_integer_rows(g, v, others)
    m, n = len(frows) - 1, len(grows) - 1
    blist = [bounds[w] for w in order]

    def specialize(row: dict, a: int) -> dict:
        out: dict = {}
        pw: dict[int, int] = {}
        for key, c in row.items():
            e = key[0]
            if e not in pw:
                pw[e] = a**e
            rest = key[1:]
            out[rest] = out.get(rest, 0) + c * pw[e]
        return {k: c for k, c in out.items() if c}

    def solve(level: int, fr: list[dict], gr: list[dict]) -> dict:
        budget.check_time()
        if level == len(others):
            fs = [row.get((), 0) for row in fr]
            gs = [row.get((), 0) for row in gr]
            det = _int_bareiss(sylvester_matrix(fs, gs, 0))
            return {(): det} if det else {}
        pts = _interp_points(blist[level] + 1)
        samples = []
        keys: set = set()
        for a in pts:
            res = solve(level + 1, [specialize(r, a) for r in fr], [specialize(r, a) for r in gr])
            samples.append(res)
            keys.update(res)
        out: dict = {}
        for key in keys:
            vals = [s.get(key, 0) for s in samples]
            for e, c in enumerate(_newton_coefficients(pts, vals)):
                if c:
                    out[(e,) + key] = c
        return out

    raw = solve(0, frows, grows)
    scale = mpq(1, mpz(df) ** n * mpz(dg) ** m)
    re = {}
    for key, c in raw.items():
        mono = 0
        for i, e in zip(others, key):
            mono |= e << ring.shifts[i]
        re[mono] = mpq(c) * scale
    return MultiPoly._make(ring, {k: c for k, c in re.items() if c}, {})


def scalar_resultant(fc: Sequence, gc: Sequence) -> GaussianRational:
    """Resultant of two univariate polynomials given by descending coefficients in Q(i)."""
    fc = [GaussianRational.coerce(c) for c in fc]
    gc = [GaussianRational.coerce(c) for c in gc]
    mat = sylvester_matrix(fc, gc, GaussianRational(0))
    return bareiss_determinant(mat, lambda a, b: a / b, one=GaussianRational(1))


def leading_coefficients_vanish(
    f: MultiPoly, g: MultiPoly, v: Variable | str, assignment: dict
) -> bool:
    """True when a specialization kills both leading coefficients in ``v``.

    In that case the specialized resultant vanishes whether or not the
    specialized polynomials share a finite root: the resultant then
    over-represents the common-root locus.
    """
    lf = f.coefficients_in(v)[f.degree(v)]
    lg = g.coefficients_in(v)[g.degree(v)]

    def vanishes(p: MultiPoly) -> bool:
        q = p
        for var, val in assignment.items():
            q = q.substitute(var, val)
        return q.is_zero()

    return vanishes(lf) and vanishes(lg)


__all__ = [
    "LAMBDA",
    "PolyRing",
    "bareiss_determinant",
    "coefficient_list",
    "degree_bounds",
    "leading_coefficients_vanish",
    "scalar_resultant",
    "sylvester_matrix",
    "sylvester_resultant",
]
