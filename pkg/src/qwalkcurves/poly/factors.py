"""Known-factor stripping, perfect powers, gcds and square-free parts.

There is deliberately no general factorization here: the elimination pipeline
only ever needs to peel off a small set of anticipated factors and to reduce
repeated factors to a single copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .budget import Budget
from .gaussian import GaussianRational
from .multipoly import MultiPoly, NotExactDivision, PolyRing, Variable


@dataclass
class FactoredPoly:
    """``scalar * prod(f**m for f, m in factors)``."""

    scalar: GaussianRational
    factors: list[tuple[MultiPoly, int]] = field(default_factory=list)

    def expand(self, ring: PolyRing) -> MultiPoly:
        out = ring.constant(self.scalar)
        for f, m in self.factors:
            out = out * f**m
        return out


def normalize_scalar(p: MultiPoly) -> MultiPoly:
    """Divide by the leading coefficient under the fixed lex order.

    Raises
    ------
    ZeroDivisionError
        For the zero polynomial.
    """
    return p.monic()


def primitive_normalize(p: MultiPoly) -> MultiPoly:
    """Scale to coprime Gaussian-integer coefficients with a canonical unit.

    The unit in ``{1, -1, i, -i}`` is the one that moves the leading
    coefficient (lex order) into the quadrant ``re > 0, im >= 0``.  Two
    polynomials that differ by a nonzero rational or
    unit factor normalize to the same result.
    """
    if p.is_zero():
        return p
    q = p.scale(1 / p.integer_content())
    lc = q.leading_coefficient()
    for unit in (GaussianRational(1), GaussianRational(-1), GaussianRational(0, -1), GaussianRational(0, 1)):
        c = lc * unit
        if c.re > 0 and c.im >= 0:
            return q.scale(unit)
    raise AssertionError("unreachable")


def strip_known_factors(
    p: MultiPoly, candidates: Sequence[MultiPoly]
) -> tuple[MultiPoly, list[tuple[MultiPoly, int]]]:
    """Trial-divide ``p`` by each candidate as often as the division is exact.

    Returns the reduced polynomial and ``(candidate, multiplicity)`` for every
    candidate that divided at least once, so that
    ``reduced * prod(c**m) == p`` holds exactly.
    """
    if p.is_zero():
        return p, []
    found = []
    for c in candidates:
        if c.is_constant():
            raise ValueError("candidate factors must be non-constant")
        mult = 0
        while True:
            if not _may_divide(c, p):
                break
            try:
                q = p.exquo(c)
            except NotExactDivision:
                break
            p = q
            mult += 1
        if mult:
            found.append((c, mult))
    return p, found


def _may_divide(c: MultiPoly, p: MultiPoly) -> bool:
    # cheap degree filter before attempting a division
    for v in c.variables_present():
        if c.degree(v) > p.degree(v):
            return False
    return True


def default_candidates(ring: PolyRing, extended: bool = True) -> list[MultiPoly]:
    """The candidate set ``{lambda, lambda-1, lambda+1, lambda^2+1, x_k, X_k}``.

    With ``extended`` the phase-variable factors ``x_k - 1``, ``x_k + 1`` and
    ``x_k^2 + 1`` are added; they occur as spurious powers in stage-one
    resultants of walks with long steps (the hexagonal walk).
    """
    lam = ring.gen(ring.lam)
    out = [lam, lam - 1, lam + 1, lam**2 + 1]
    for k in range(1, ring.d + 1):
        out.append(ring.gen(ring.x(k)))
    for k in range(1, ring.d + 1):
        out.append(ring.gen(ring.X(k)))
    if extended:
        for k in range(1, ring.d + 1):
            xk = ring.gen(ring.x(k))
            out.extend([xk - 1, xk + 1, xk**2 + 1])
    return out


# -- perfect powers ------------------------------------------------------------


def _trailing_monomial(p: MultiPoly) -> int:
    return min(p.monomials())


def perfect_root(p: MultiPoly, k: int) -> tuple[MultiPoly, GaussianRational] | None:
    """Find ``q`` and a scalar ``c`` with ``p == c * q**k``, or return ``None``.

    ``q`` is normalized so that its lex-smallest term has coefficient 1.  The
    coefficients of ``q`` are recovered in one variable at a time from the
    power-series identity ``g * f' = k * f * g'`` for ``f = g**k``.
    """
    if k < 1:
        raise ValueError("root index must be positive")
    if p.is_zero():
        return None
    if k == 1:
        c = p.coefficient(_trailing_monomial(p))
        return p.scale(c.inverse()), c
    c = p.coefficient(_trailing_monomial(p))
    f = p.scale(c.inverse())
    q = _root_monic(f, k)
    if q is None:
        return None
    if q**k != f:
        return None
    return q, c


def _root_monic(f: MultiPoly, k: int) -> MultiPoly | None:
    ring = f.ring
    present = f.variables_present()
    if not present:
        return ring.one if f == 1 else None
    v = present[0]
    parts = f.coefficients_in(v)
    low = min(parts)
    high = max(parts)
    if low % k or high % k:
        return None
    shift = low // k
    fs = [parts.get(low + j, ring.zero) for j in range(high - low + 1)]
    g0 = _root_monic(fs[0], k)
    if g0 is None:
        return None
    ng = (high - low) // k
    gs = [g0]
    f0 = fs[0]
    for n in range(1, ng + 1):
        acc = fs[n].scale(n) * g0
        for i in range(1, n):
            coeff = (k + 1) * i - n
            if coeff and not gs[i].is_zero() and not fs[n - i].is_zero():
                acc = acc - (gs[i] * fs[n - i]).scale(coeff)
        if acc.is_zero():
            gs.append(ring.zero)
            continue
        try:
            gn = acc.exquo(f0).scale(GaussianRational(1, 0) / (k * n))
        except NotExactDivision:
            return None
        gs.append(gn)
    vgen = ring.gen(v)
    out = ring.zero
    for j in range(ng, -1, -1):
        out = out * vgen + gs[j]
    if shift:
        out = out * ring.gen(v, shift)
    return out


def extract_perfect_power(p: MultiPoly, max_index: int | None = None) -> tuple[MultiPoly, int, GaussianRational]:
    """Write ``p == c * q**e`` with ``e`` as large as possible (prime-by-prime)."""
    if p.is_zero():
        return p, 1, GaussianRational(0)
    scalar = GaussianRational(1)
    exponent = 1
    q = p
    limit = max_index or max(q.degree(v) for v in q.variables_present()) if q.variables_present() else 1
    prime = 2
    while prime <= limit:
        while True:
            found = perfect_root(q, prime)
            if found is None or found[0].is_constant():
                break
            root, c = found
            scalar = scalar * c ** exponent
            q = root
            exponent *= prime
        prime += 1 if prime == 2 else 2
        limit = max(q.degree(v) for v in q.variables_present()) if q.variables_present() else 0
    return q, exponent, scalar


# -- gcd and square-free parts ----------------------------------------------------


def _coeffs_desc(p: MultiPoly, v: Variable) -> list[MultiPoly]:
    parts = p.coefficients_in(v)
    if not parts:
        return []
    top = max(parts)
    zero = p.ring.zero
    return [parts.get(e, zero) for e in range(top, -1, -1)]


def _from_coeffs(ring: PolyRing, cs: list[MultiPoly], v: Variable) -> MultiPoly:
    out = ring.zero
    g = ring.gen(v)
    for c in cs:
        out = out * g + c
    return out


def _prem(a: list[MultiPoly], b: list[MultiPoly], budget: Budget | None = None) -> list[MultiPoly]:
    """Pseudo-remainder of descending coefficient lists."""
    a = list(a)
    lb = b[0]
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        if budget is not None:
            budget.check_time()
        la = a[0]
        a = [ai * lb for ai in a]
        for i in range(1, len(b)):
            a[i] = a[i] - la * b[i]
        a = a[1:]
        while a and a[0].is_zero():
            a = a[1:]
    return a


def content_in(p: MultiPoly, v: Variable, budget: Budget | None = None) -> MultiPoly:
    """gcd of the coefficients of ``p`` viewed as a polynomial in ``v``."""
    g = p.ring.zero
    for c in p.coefficients_in(v).values():
        g = gcd(g, c, budget)
        if g.is_constant():
            return p.ring.one
    return g


def gcd(a: MultiPoly, b: MultiPoly, budget: Budget | None = None) -> MultiPoly:
    """Greatest common divisor by recursive primitive remainder sequences.

    The result is normalized to leading coefficient 1 (``gcd(0, 0) == 0``).
    """
    ring = a.ring
    if a.is_zero():
        return b.monic() if not b.is_zero() else b
    if b.is_zero():
        return a.monic()
    if budget is not None:
        budget.check_time()
    present = set(a.variables_present()) | set(b.variables_present())
    if not present:
        return ring.one
    v = min(present, key=ring.index)
    if not a.has(v):
        return gcd(a, content_in(b, v, budget), budget)
    if not b.has(v):
        return gcd(content_in(a, v, budget), b, budget)
    ca = content_in(a, v, budget)
    cb = content_in(b, v, budget)
    c = gcd(ca, cb, budget)
    pa = a.exquo(ca)
    pb = b.exquo(cb)
    if pa.degree(v) < pb.degree(v):
        pa, pb = pb, pa
    A = _coeffs_desc(pa, v)
    B = _coeffs_desc(pb, v)
    while True:
        if budget is not None:
            budget.check_time()
        R = _prem(A, B, budget)
        if not R:
            break
        r = _from_coeffs(ring, R, v)
        if not r.has(v):
            B = None
            break
        r = r.exquo(content_in(r, v, budget))
        r = r.scale(1 / r.integer_content())
        A, B = B, _coeffs_desc(r, v)
    if B is None:
        return c.monic()
    g = _from_coeffs(ring, B, v)
    g = g.exquo(content_in(g, v, budget))
    return (g * c).monic()


def square_free_part(p: MultiPoly, budget: Budget | None = None) -> MultiPoly:
    """Product of the distinct irreducible factors of ``p`` (up to a scalar).

    Factors free of the working variable are handled through the content, so
    nothing is lost: ``p`` and the result have the same zero set.
    """
    if p.is_zero():
        return p
    present = p.variables_present()
    if not present:
        return p.ring.one
    v = present[0]
    cont = content_in(p, v, budget)
    prim = p.exquo(cont)
    g = gcd(prim, prim.diff(v), budget)
    sqf = prim.exquo(g)
    if not cont.is_constant():
        sqf = sqf * square_free_part(cont, budget)
    return sqf.monic()


def _univariate_gcd_degree(a: list, b: list) -> int:
    """Degree of gcd of two dense univariate polynomials (ascending Q(i) coefficients)."""

    def trim(p):
        while p and not p[-1]:
            p.pop()
        return p

    a = trim(list(a))
    b = trim(list(b))
    while b:
        inv = b[-1].inverse()
        while len(a) >= len(b) and a:
            q = a[-1] * inv
            shift = len(a) - len(b)
            for i, c in enumerate(b):
                a[shift + i] = a[shift + i] - q * c
            trim(a)
        a, b = b, a
    return len(a) - 1


def looks_square_free(p: MultiPoly, seed: int = 0, trials: int = 2) -> bool:
    """Randomized square-free test.

    For each variable ``v`` the other variables are specialized at random
    integers.  If the specialization keeps the degree in ``v`` and is
    square-free, ``p`` has no repeated factor involving ``v``.  ``True`` is
    therefore a proof; ``False`` only means no such certificate was found.
    """
    import random

    rng = random.Random(seed)
    present = p.variables_present()
    for v in present:
        deg = p.degree(v)
        parts = p.coefficients_in(v)
        certified = False
        for _ in range(trials):
            point = {w: rng.randint(-97, 97) for w in present if w != v}
            coeffs = []
            for e in range(deg + 1):
                c = parts.get(e)
                if c is None:
                    coeffs.append(GaussianRational(0))
                    continue
                for w, val in point.items():
                    c = c.substitute(w, val)
                coeffs.append(c.constant_coefficient())
            if not coeffs[-1]:
                continue
            deriv = [coeffs[e] * e for e in range(1, deg + 1)]
            if _univariate_gcd_degree(coeffs, deriv) == 0:
                certified = True
                break
        if not certified:
            return False
    return True


def reduce_multiplicity(p: MultiPoly, budget: Budget | None = None) -> tuple[MultiPoly, int, str]:
    """Remove repeated factors as cheaply as possible.

    Order of attempts: a randomized square-free certificate; exact perfect
    power extraction (``big**3 -> big``); and, if a budget is given, the
    gcd-based square-free part.  If every attempt fails the polynomial is
    returned unchanged, which is safe: it has the same zero set.

    Returns ``(reduced, exponent_removed, method)``.
    """
    if p.is_constant() or looks_square_free(p):
        return p.monic(), 1, "none"
    q, e, _ = extract_perfect_power(p)
    method = "perfect-power" if e > 1 else "none"
    if e > 1 and looks_square_free(q):
        return q.monic(), e, method
    if budget is not None:
        from .budget import BudgetExceeded

        try:
            r = square_free_part(q, budget)
            if r != q.monic():
                method = "gcd" if method == "none" else method + "+gcd"
            q = r
        except BudgetExceeded:
            method += "+unreduced"
    return q.monic(), e, method


def product(ring: PolyRing, factors: Iterable[tuple[MultiPoly, int]]) -> MultiPoly:
    out = ring.one
    for f, m in factors:
        out = out * f**m
    return out
