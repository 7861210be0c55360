"""Exact Gaussian rationals, the coefficient field Q(i)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Complex, Rational

from gmpy2 import mpq

_ZERO = mpq(0)
_ONE = mpq(1)


def _to_mpq(value) -> mpq:
    if isinstance(value, str):
        return mpq(value.strip())
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"cannot represent {value!r} exactly")
        return mpq(value)
    return mpq(value)


def format_rational(q) -> str:
    """Render a rational as the canonical ``"p/q"`` string (``"p"`` when q == 1)."""
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class GaussianRational:
    """An element ``re + im*i`` of Q(i) with arbitrary-precision parts.

    Both parts are ``gmpy2.mpq`` values, which are always kept reduced with a
    positive denominator, so equality and hashing are structural.

    Examples
    --------
    >>> z = GaussianRational(1, 2) * GaussianRational("1/2", -1)
    >>> z
    GaussianRational('5/2', '0')
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im != 0:
                raise TypeError("imaginary part given twice")
            self.re, self.im = re.re, re.im
            return
        if isinstance(re, complex):
            self.re, self.im = _to_mpq(re.real), _to_mpq(re.imag) + _to_mpq(im)
            return
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> GaussianRational:
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def coerce(cls, value) -> GaussianRational:
        if isinstance(value, GaussianRational):
            return value
        return cls(value)

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._raw(a * c, _ZERO)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational(other)
            except TypeError:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = GaussianRational._raw(_ONE, _ZERO)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> GaussianRational:
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("inverse of zero in Q(i)")
            return GaussianRational._raw(1 / a, _ZERO)
        n = a * a + b * b
        return GaussianRational._raw(a / n, -b / n)

    def conjugate(self) -> GaussianRational:
        return GaussianRational._raw(self.re, -self.im)

    def norm(self) -> mpq:
        """Field norm ``re**2 + im**2``."""
        return self.re * self.re + self.im * self.im

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction, Rational)) or type(other) is type(_ZERO):
            return not self.im and self.re == other
        if isinstance(other, Complex):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    # -- conversion -------------------------------------------------------

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def denominator_lcm(self) -> int:
        a, b = int(self.re.denominator), int(self.im.denominator)
        from math import lcm

        return lcm(a, b)

    def to_json(self) -> dict:
        return {"re": format_rational(self.re), "im": format_rational(self.im)}

    @classmethod
    def from_json(cls, obj) -> GaussianRational:
        if isinstance(obj, dict):
            return cls(obj.get("re", 0), obj.get("im", 0))
        return cls(obj)

    def __repr__(self) -> str:
        return f"GaussianRational({format_rational(self.re)!r}, {format_rational(self.im)!r})"

    def __str__(self) -> str:
        if not self.im:
            return format_rational(self.re)
        if not self.re:
            return f"{format_rational(self.im)}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({format_rational(self.re)} {sign} {format_rational(abs(self.im))}*i)"


ZERO = GaussianRational._raw(_ZERO, _ZERO)
ONE = GaussianRational._raw(_ONE, _ZERO)
I = GaussianRational._raw(_ZERO, _ONE)
