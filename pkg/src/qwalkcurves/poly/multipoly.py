"""Sparse multivariate polynomials over Q(i).

A :class:`PolyRing` fixes the variable list ``lambda > x1 > ... > xd > X1 > ... > Xd``.
Monomials are packed into a single Python integer, one 16-bit slot per
variable with ``lambda`` in the most significant slot, so that integer
comparison *is* the lexicographic monomial order and monomial multiplication
is integer addition.

Coefficients are stored as two dictionaries of ``gmpy2.mpq`` (real and
imaginary parts); a monomial is present in a dictionary only when that part
is nonzero.  Every public accessor hands out :class:`GaussianRational`.
"""

from __future__ import annotations

import ast
import heapq
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from gmpy2 import mpq

from .gaussian import GaussianRational, format_rational

BITS = 16
_SLOT = (1 << BITS) - 1
MAX_EXPONENT = (1 << (BITS - 1)) - 1
_Z = mpq(0)


class NotExactDivision(ArithmeticError):
    """Raised when an exact quotient was requested but a remainder is left."""


@dataclass(frozen=True, order=False)
class Variable:
    """One of ``lambda``, ``x_k`` (phase variable) or ``X_k`` (spatial variable).

    The auxiliary kind ``T`` exists only in saturation rings (see
    :meth:`PolyRing.with_aux`).
    """

    kind: str  # "lambda" | "x" | "X" | "T"
    index: int = 0

    def __post_init__(self):
        if self.kind not in ("lambda", "x", "X", "T"):
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind in ("lambda", "T") and self.index != 0:
            raise ValueError(f"{self.kind} carries no index")
        if self.kind in ("x", "X") and self.index < 1:
            raise ValueError("phase/spatial variables are indexed from 1")

    @property
    def name(self) -> str:
        if self.kind in ("lambda", "T"):
            return self.kind
        return f"{self.kind}{self.index}"

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Variable({self.name})"

    @classmethod
    def parse(cls, name: str) -> Variable:
        name = name.strip()
        if name in ("lambda", "lam", "l", "λ"):
            return cls("lambda")
        if name == "T":
            return cls("T")
        if len(name) >= 2 and name[0] in "xX" and name[1:].isdigit():
            return cls(name[0], int(name[1:]))
        raise ValueError(f"not a variable name: {name!r}")


LAMBDA = Variable("lambda")
AUX = Variable("T")


class PolyRing:
    """Q(i)[lambda, x1..xd, X1..Xd] with the fixed lexicographic order.

    Rings are interned: ``PolyRing(2) is PolyRing(2)``.  ``aux=True`` prepends
    one auxiliary variable ``T`` above ``lambda``; it is used only to express
    saturations as eliminations.
    """

    _cache: dict[tuple[int, bool], PolyRing] = {}

    def __new__(cls, d: int = 2, aux: bool = False):
        if d < 1:
            raise ValueError("dimension must be positive")
        key = (d, bool(aux))
        ring = cls._cache.get(key)
        if ring is None:
            ring = super().__new__(cls)
            ring._setup(d, bool(aux))
            cls._cache[key] = ring
        return ring

    def _setup(self, d: int, aux: bool) -> None:
        self.d = d
        self.aux = aux
        self.variables: tuple[Variable, ...] = (
            ((AUX,) if aux else ())
            + (LAMBDA,)
            + tuple(Variable("x", k) for k in range(1, d + 1))
            + tuple(Variable("X", k) for k in range(1, d + 1))
        )
        self.nvars = len(self.variables)
        self.shifts = tuple((self.nvars - 1 - i) * BITS for i in range(self.nvars))
        self.guard = sum(1 << (s + BITS - 1) for s in self.shifts)
        self._index = {v: i for i, v in enumerate(self.variables)}

    def __reduce__(self):
        return (PolyRing, (self.d, self.aux))

    def __repr__(self) -> str:
        return f"PolyRing(d={self.d}{', aux=True' if self.aux else ''})"

    def with_aux(self) -> PolyRing:
        return PolyRing(self.d, True)

    def without_aux(self) -> PolyRing:
        return PolyRing(self.d, False)

    def convert(self, p: MultiPoly) -> MultiPoly:
        """Move ``p`` into this ring (variables matched by name)."""
        if p.ring is self:
            return p
        src = p.ring
        mapping = []
        for i, v in enumerate(src.variables):
            if v in self._index:
                mapping.append((src.shifts[i], self.shifts[self._index[v]]))
            else:
                mapping.append((src.shifts[i], None))

        def move(m):
            out = 0
            for s_src, s_dst in mapping:
                e = (m >> s_src) & _SLOT
                if e:
                    if s_dst is None:
                        raise ValueError("polynomial uses a variable absent from the target ring")
                    out |= e << s_dst
            return out

        return MultiPoly._make(
            self, {move(m): c for m, c in p._re.items()}, {move(m): c for m, c in p._im.items()}
        )

    # -- variables ----------------------------------------------------------

    @property
    def lam(self) -> Variable:
        return LAMBDA

    def x(self, k: int) -> Variable:
        return Variable("x", k)

    def X(self, k: int) -> Variable:
        return Variable("X", k)

    @property
    def phase_variables(self) -> tuple[Variable, ...]:
        return tuple(Variable("x", k) for k in range(1, self.d + 1))

    @property
    def spatial_variables(self) -> tuple[Variable, ...]:
        return tuple(Variable("X", k) for k in range(1, self.d + 1))

    def index(self, v: Variable | str) -> int:
        if isinstance(v, str):
            v = Variable.parse(v)
        try:
            return self._index[v]
        except KeyError:
            raise ValueError(f"{v} is not a variable of {self!r}") from None

    # -- monomials ----------------------------------------------------------

    def pack(self, exps: Iterable[int]) -> int:
        m = 0
        exps = tuple(exps)
        if len(exps) != self.nvars:
            raise ValueError(f"expected {self.nvars} exponents, got {len(exps)}")
        for e, s in zip(exps, self.shifts):
            if e < 0 or e > MAX_EXPONENT:
                raise OverflowError(f"exponent {e} outside [0, {MAX_EXPONENT}]")
            m |= e << s
        return m

    def unpack(self, m: int) -> tuple[int, ...]:
        return tuple((m >> s) & _SLOT for s in self.shifts)

    def exponent(self, m: int, i: int) -> int:
        return (m >> self.shifts[i]) & _SLOT

    def var_monomial(self, i: int, e: int = 1) -> int:
        return e << self.shifts[i]

    def divides(self, a: int, b: int) -> bool:
        """True if monomial ``a`` divides monomial ``b``."""
        g = self.guard
        return ((b | g) - a) & g == g

    def lcm(self, a: int, b: int) -> int:
        m = 0
        for s in self.shifts:
            ea = (a >> s) & _SLOT
            eb = (b >> s) & _SLOT
            m |= (ea if ea > eb else eb) << s
        return m

    def total_degree(self, m: int) -> int:
        return sum((m >> s) & _SLOT for s in self.shifts)

    def monomial_str(self, m: int) -> str:
        parts = []
        for v, s in zip(self.variables, self.shifts):
            e = (m >> s) & _SLOT
            if e == 1:
                parts.append(v.name)
            elif e > 1:
                parts.append(f"{v.name}^{e}")
        return "*".join(parts) if parts else "1"

    # -- constructors -------------------------------------------------------

    @property
    def zero(self) -> MultiPoly:
        return MultiPoly._make(self, {}, {})

    @property
    def one(self) -> MultiPoly:
        return self.constant(1)

    def constant(self, c) -> MultiPoly:
        c = GaussianRational.coerce(c)
        re = {0: c.re} if c.re else {}
        im = {0: c.im} if c.im else {}
        return MultiPoly._make(self, re, im)

    def gen(self, v: Variable | str, e: int = 1) -> MultiPoly:
        i = self.index(v)
        return MultiPoly._make(self, {self.var_monomial(i, e): mpq(1)}, {})

    @property
    def gens(self) -> tuple[MultiPoly, ...]:
        return tuple(self.gen(v) for v in self.variables)

    def from_terms(self, terms: Mapping) -> MultiPoly:
        """Build from ``{exponents: coeff}``; exponents are tuples or ``{Variable: int}``."""
        re: dict[int, mpq] = {}
        im: dict[int, mpq] = {}
        for key, c in terms.items():
            if isinstance(key, Mapping):
                exps = [0] * self.nvars
                for v, e in key.items():
                    exps[self.index(v)] += int(e)
                m = self.pack(exps)
            else:
                m = self.pack(key)
            c = GaussianRational.coerce(c)
            if c.re:
                re[m] = re.get(m, _Z) + c.re
            if c.im:
                im[m] = im.get(m, _Z) + c.im
        return MultiPoly._make(self, _clean(re), _clean(im))

    def parse(self, text: str) -> MultiPoly:
        """Parse an arithmetic expression in ``lambda``, ``x1``, ``X1``, ... and ``i``.

        Only ``+ - * / **`` (``^`` is accepted as power) with integer literals,
        rational literals via ``/``, and the variable names are allowed.
        """
        text = re.sub(r"\blambda\b|λ", "lambda_", text.replace("^", "**"))
        tree = ast.parse(text, mode="eval")
        return self._eval_ast(tree.body)

    def _eval_ast(self, node) -> MultiPoly:
        if isinstance(node, ast.BinOp):
            left = self._eval_ast(node.left)
            if isinstance(node.op, ast.Pow):
                if not isinstance(node.right, ast.Constant) or not isinstance(node.right.value, int):
                    raise ValueError("exponents must be integer literals")
                return left ** node.right.value
            right = self._eval_ast(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not right.is_constant():
                    raise ValueError("division only by constants")
                return left * right.constant_coefficient().inverse()
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        if isinstance(node, ast.UnaryOp):
            val = self._eval_ast(node.operand)
            if isinstance(node.op, ast.USub):
                return -val
            if isinstance(node.op, ast.UAdd):
                return val
            raise ValueError("unsupported unary operator")
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return self.constant(node.value)
        if isinstance(node, ast.Name):
            name = node.id
            if name == "i":
                return self.constant(GaussianRational(0, 1))
            if name in ("lambda_", "lam", "l"):
                return self.gen(LAMBDA)
            if name == "T":
                return self.gen(AUX)
            return self.gen(Variable.parse(name))
        raise ValueError(f"cannot parse expression node {ast.dump(node)}")


def _clean(d: dict) -> dict:
    return {m: c for m, c in d.items() if c}


def _mul_real(a: dict, b: dict) -> dict:
    if len(a) < len(b):
        a, b = b, a
    out: dict[int, mpq] = {}
    get = out.get
    bi = list(b.items())
    for ma, ca in a.items():
        for mb, cb in bi:
            m = ma + mb
            out[m] = get(m, _Z) + ca * cb
    return out


def _addto(acc: dict, d: dict, sign: int = 1) -> None:
    get = acc.get
    if sign > 0:
        for m, c in d.items():
            acc[m] = get(m, _Z) + c
    else:
        for m, c in d.items():
            acc[m] = get(m, _Z) - c


class MultiPoly:
    """Immutable sparse polynomial in a :class:`PolyRing`.

    Equality is term-set equality; hashing follows it.
    """

    __slots__ = ("ring", "_re", "_im", "_hash")

    def __init__(self, ring: PolyRing, terms: Mapping | None = None):
        p = ring.from_terms(terms or {})
        self.ring = ring
        self._re = p._re
        self._im = p._im
        self._hash = None

    @classmethod
    def _make(cls, ring: PolyRing, re: dict, im: dict) -> MultiPoly:
        obj = object.__new__(cls)
        obj.ring = ring
        obj._re = re
        obj._im = im
        obj._hash = None
        return obj

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._re and not self._im

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_real(self) -> bool:
        return not self._im

    def monomials(self) -> list[int]:
        """Packed monomials in decreasing lexicographic order."""
        keys = set(self._re)
        keys.update(self._im)
        return sorted(keys, reverse=True)

    def __len__(self) -> int:
        if not self._im:
            return len(self._re)
        return len(set(self._re) | set(self._im))

    def coefficient(self, m: int) -> GaussianRational:
        return GaussianRational._raw(self._re.get(m, _Z), self._im.get(m, _Z))

    def items(self) -> Iterator[tuple[int, GaussianRational]]:
        for m in self.monomials():
            yield m, self.coefficient(m)

    def terms(self) -> dict[tuple[int, ...], GaussianRational]:
        """``{exponent tuple: coefficient}`` in decreasing monomial order."""
        return {self.ring.unpack(m): c for m, c in self.items()}

    def is_constant(self) -> bool:
        return all(m == 0 for m in self._re) and all(m == 0 for m in self._im)

    def constant_coefficient(self) -> GaussianRational:
        return self.coefficient(0)

    def leading_monomial(self) -> int:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading monomial")
        lm = max(self._re) if self._re else -1
        if self._im:
            lm = max(lm, max(self._im))
        return lm

    def leading_coefficient(self) -> GaussianRational:
        return self.coefficient(self.leading_monomial())

    def variables_present(self) -> tuple[Variable, ...]:
        ring = self.ring
        seen = 0
        for m in self._re:
            seen |= m
        for m in self._im:
            seen |= m
        return tuple(v for v, s in zip(ring.variables, ring.shifts) if (seen >> s) & _SLOT)

    def has(self, v: Variable | str) -> bool:
        return self.degree(v) > 0

    def degree(self, v: Variable | str) -> int:
        """Degree in ``v``; ``-1`` for the zero polynomial."""
        if self.is_zero():
            return -1
        s = self.ring.shifts[self.ring.index(v)]
        deg = 0
        for d in (self._re, self._im):
            for m in d:
                e = (m >> s) & _SLOT
                if e > deg:
                    deg = e
        return deg

    def degrees(self) -> dict[Variable, int]:
        return {v: self.degree(v) for v in self.ring.variables}

    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        td = self.ring.total_degree
        return max(td(m) for m in self.monomials())

    def is_real_integer(self) -> bool:
        return not self._im and all(c.denominator == 1 for c in self._re.values())

    # -- arithmetic ------------------------------------------------------------

    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            if other.ring is not self.ring:
                raise ValueError("polynomials belong to different rings")
            return other
        return self.ring.constant(other)

    def __add__(self, other) -> MultiPoly:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        re = dict(self._re)
        _addto(re, other._re)
        im = dict(self._im)
        if other._im:
            _addto(im, other._im)
        return MultiPoly._make(self.ring, _clean(re), _clean(im))

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly._make(
            self.ring, {m: -c for m, c in self._re.items()}, {m: -c for m, c in self._im.items()}
        )

    def __sub__(self, other) -> MultiPoly:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        re = dict(self._re)
        _addto(re, other._re, -1)
        im = dict(self._im)
        if other._im:
            _addto(im, other._im, -1)
        return MultiPoly._make(self.ring, _clean(re), _clean(im))

    def __rsub__(self, other) -> MultiPoly:
        return self._coerce(other) - self

    def scale(self, c) -> MultiPoly:
        c = GaussianRational.coerce(c)
        a, b = c.re, c.im
        if not b:
            if not a:
                return self.ring.zero
            return MultiPoly._make(
                self.ring,
                {m: v * a for m, v in self._re.items()},
                {m: v * a for m, v in self._im.items()},
            )
        re: dict[int, mpq] = {}
        im: dict[int, mpq] = {}
        for m, v in self._re.items():
            re[m] = v * a
            im[m] = v * b
        for m, v in self._im.items():
            re[m] = re.get(m, _Z) - v * b
            im[m] = im.get(m, _Z) + v * a
        return MultiPoly._make(self.ring, _clean(re), _clean(im))

    def mul_monomial(self, mono: int, c=None) -> MultiPoly:
        p = self if c is None else self.scale(c)
        return MultiPoly._make(
            self.ring, {m + mono: v for m, v in p._re.items()}, {m + mono: v for m, v in p._im.items()}
        )

    def __mul__(self, other) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        if other.ring is not self.ring:
            raise ValueError("polynomials belong to different rings")
        if not self._im and not other._im:
            return MultiPoly._make(self.ring, _clean(_mul_real(self._re, other._re)), {})
        re = _mul_real(self._re, other._re)
        if self._im and other._im:
            _addto(re, _mul_real(self._im, other._im), -1)
        im: dict[int, mpq] = {}
        if self._im:
            _addto(im, _mul_real(self._im, other._re))
        if other._im:
            _addto(im, _mul_real(self._re, other._im))
        return MultiPoly._make(self.ring, _clean(re), _clean(im))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> MultiPoly:
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = self.ring.one
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            return self.exquo(other)
        return self.scale(GaussianRational.coerce(other).inverse())

    # -- equality -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.ring is other.ring and self._re == other._re and self._im == other._im
        try:
            return self == self.ring.constant(other)
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring.d, self.ring.aux, frozenset(self._re.items()), frozenset(self._im.items())))
        return self._hash

    # -- calculus / structure --------------------------------------------------

    def diff(self, v: Variable | str) -> MultiPoly:
        """Formal partial derivative with respect to ``v``."""
        ring = self.ring
        i = ring.index(v)
        s = ring.shifts[i]
        unit = 1 << s
        out = []
        for d in (self._re, self._im):
            nd: dict[int, mpq] = {}
            for m, c in d.items():
                e = (m >> s) & _SLOT
                if e:
                    nd[m - unit] = c * e
            out.append(nd)
        return MultiPoly._make(ring, out[0], out[1])

    def coefficients_in(self, v: Variable | str) -> dict[int, MultiPoly]:
        """Split into ``{k: c_k}`` with ``self == sum c_k * v**k`` and ``c_k`` free of ``v``."""
        ring = self.ring
        s = ring.shifts[ring.index(v)]
        mask = _SLOT << s
        parts: dict[int, tuple[dict, dict]] = {}
        for which, d in enumerate((self._re, self._im)):
            for m, c in d.items():
                e = (m >> s) & _SLOT
                slot = parts.setdefault(e, ({}, {}))
                slot[which][m & ~mask] = c
        return {e: MultiPoly._make(ring, re, im) for e, (re, im) in parts.items()}

    def substitute(self, v: Variable | str, value) -> MultiPoly:
        """Replace ``v`` by a scalar in Q(i) or by another polynomial."""
        parts = self.coefficients_in(v)
        if not parts:
            return self
        if isinstance(value, MultiPoly):
            result = self.ring.zero
            for k in sorted(parts, reverse=True):
                result = result + parts[k] * value**k
            return result
        c = GaussianRational.coerce(value)
        result = self.ring.zero
        top = max(parts)
        for k in range(top, -1, -1):
            result = result.scale(c)
            if k in parts:
                result = result + parts[k]
        return result

    def content_monomial(self) -> int:
        """Largest monomial dividing every term (gcd of monomials)."""
        if self.is_zero():
            return 0
        ring = self.ring
        mons = self.monomials()
        g = mons[0]
        for m in mons[1:]:
            gm = 0
            for s in ring.shifts:
                a = (g >> s) & _SLOT
                b = (m >> s) & _SLOT
                gm |= (a if a < b else b) << s
            g = gm
            if g == 0:
                break
        return g

    def strip_monomial_content(self) -> tuple[MultiPoly, int]:
        g = self.content_monomial()
        if g == 0:
            return self, 0
        return (
            MultiPoly._make(
                self.ring, {m - g: c for m, c in self._re.items()}, {m - g: c for m, c in self._im.items()}
            ),
            g,
        )

    def monic(self) -> MultiPoly:
        """Scale so that the leading coefficient (lex order) is 1."""
        if self.is_zero():
            raise ZeroDivisionError("cannot normalize the zero polynomial")
        return self.scale(self.leading_coefficient().inverse())

    def conjugate(self) -> MultiPoly:
        return MultiPoly._make(self.ring, dict(self._re), {m: -c for m, c in self._im.items()})

    def denominator_lcm(self) -> int:
        from math import lcm

        out = 1
        for d in (self._re, self._im):
            for c in d.values():
                out = lcm(out, int(c.denominator))
        return out

    def integer_content(self) -> mpq:
        """Positive rational ``c`` such that ``self / c`` has coprime Gaussian-integer coefficients."""
        from math import gcd

        den = self.denominator_lcm()
        g = 0
        for d in (self._re, self._im):
            for c in d.values():
                g = gcd(g, int(c * den))
        if g == 0:
            return mpq(1)
        return mpq(g, den)

    # -- division ----------------------------------------------------------------

    def divmod(self, divisor: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
        """Multivariate division by a single divisor under the lex order."""
        return _divide(self, divisor, exact=False)

    def exquo(self, divisor: MultiPoly) -> MultiPoly:
        """Exact quotient; raises :class:`NotExactDivision` on a nonzero remainder."""
        q, _ = _divide(self, divisor, exact=True)
        return q

    def divides(self, other: MultiPoly) -> bool:
        try:
            _divide(other, self, exact=True)
        except NotExactDivision:
            return False
        return True

    # -- numerics ---------------------------------------------------------------

    def evaluate(self, assignment: Mapping) -> complex:
        """Numeric value at ``{Variable or name: complex}`` by nested Horner evaluation."""
        ring = self.ring
        values: list[complex | None] = [None] * ring.nvars
        for k, val in assignment.items():
            values[ring.index(k)] = complex(val)
        present = self.variables_present()
        for v in present:
            if values[ring.index(v)] is None:
                raise KeyError(f"no value assigned to variable {v.name}")
        if self.is_zero():
            return 0j
        rows = [(ring.unpack(m), complex(c)) for m, c in self.items()]
        order = [ring.index(v) for v in present]
        return _horner(rows, order, values)

    def to_numeric(self) -> list[tuple[tuple[int, ...], complex]]:
        return [(self.ring.unpack(m), complex(c)) for m, c in self.items()]

    def evaluate_array(self, assignment: Mapping):
        """Vectorized evaluation over broadcastable numpy arrays."""
        import numpy as np

        ring = self.ring
        arrays = {}
        for k, val in assignment.items():
            arrays[ring.index(k)] = np.asarray(val)
        for v in self.variables_present():
            if ring.index(v) not in arrays:
                raise KeyError(f"no value assigned to variable {v.name}")
        shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
        cache: dict[tuple[int, int], object] = {}

        def power(i, e):
            key = (i, e)
            if key not in cache:
                cache[key] = arrays[i] ** e
            return cache[key]

        total = None
        for exps, c in self.to_numeric():
            term = np.full(shape, c if c.imag else c.real)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            total = term if total is None else total + term
        if total is None:
            return np.zeros(shape)
        return total

    # -- presentation -------------------------------------------------------------

    def __repr__(self) -> str:
        return f"MultiPoly({self})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        ring = self.ring
        out = []
        for m, c in self.items():
            mono = ring.monomial_str(m)
            if c.is_real():
                neg = c.re < 0
                mag = format_rational(abs(c.re))
                coeff = "" if (mag == "1" and m != 0) else mag
            elif not c.re:
                neg = c.im < 0
                mag = format_rational(abs(c.im))
                coeff = "i" if mag == "1" else f"{mag}*i"
            else:
                neg = False
                coeff = str(c)
            body = mono if m != 0 else ""
            if coeff and body:
                term = f"{coeff}*{body}"
            else:
                term = coeff or body
            if not out:
                out.append(("-" if neg else "") + term)
            else:
                out.append(("- " if neg else "+ ") + term)
        return " ".join(out)

    def to_json(self) -> list[dict]:
        """Canonical form: terms sorted by decreasing lex order."""
        ring = self.ring
        rows = []
        for m, c in self.items():
            exps = {v.name: e for v, e in zip(ring.variables, ring.unpack(m)) if e}
            rows.append({"coeff": c.to_json(), "exps": exps})
        return rows

    @classmethod
    def from_json(cls, ring: PolyRing, rows: list[dict]) -> MultiPoly:
        terms = {}
        for row in rows:
            exps = {Variable.parse(k): int(e) for k, e in row.get("exps", {}).items()}
            key = tuple(exps.get(v, 0) for v in ring.variables)
            if key in terms:
                raise ValueError(f"duplicate monomial {exps} in polynomial JSON")
            terms[key] = GaussianRational.from_json(row["coeff"])
        return ring.from_terms(terms)


def _horner(rows, order, values) -> complex:
    if not order:
        return sum(c for _, c in rows)
    i = order[0]
    rest = order[1:]
    groups: dict[int, list] = {}
    for exps, c in rows:
        groups.setdefault(exps[i], []).append((exps, c))
    x = values[i]
    acc = 0j
    top = max(groups)
    for e in range(top, -1, -1):
        acc *= x
        if e in groups:
            acc += _horner(groups[e], rest, values)
    return acc


def _divide(a: MultiPoly, b: MultiPoly, exact: bool) -> tuple[MultiPoly, MultiPoly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    ring = a.ring
    if b.ring is not ring:
        raise ValueError("polynomials belong to different rings")
    if a.is_zero():
        return ring.zero, ring.zero
    lm_b = b.leading_monomial()
    divides = ring.divides
    real = not a._im and not b._im
    if real:
        lc_inv = 1 / b._re[lm_b]
        rem = dict(a._re)
        bterms = [(m - lm_b, c) for m, c in b._re.items() if m != lm_b]
        heap = [-m for m in rem]
        heapq.heapify(heap)
        quo: dict[int, mpq] = {}
        out: dict[int, mpq] = {}
        get = rem.get
        while heap:
            m = -heapq.heappop(heap)
            c = rem.pop(m, None)
            if not c:
                continue
            while heap and heap[0] == -m:
                heapq.heappop(heap)
            if divides(lm_b, m):
                q = c * lc_inv
                shift = m - lm_b
                quo[shift] = q
                for bm, bc in bterms:
                    t = bm + shift + lm_b
                    old = get(t)
                    if old is None:
                        rem[t] = -q * bc
                        heapq.heappush(heap, -t)
                    else:
                        rem[t] = old - q * bc
            else:
                if exact:
                    raise NotExactDivision(f"{ring.monomial_str(m)} not divisible by leading monomial")
                out[m] = c
        return MultiPoly._make(ring, _clean(quo), {}), MultiPoly._make(ring, _clean(out), {})

    lc_inv = b.leading_coefficient().inverse()
    rem_re = dict(a._re)
    rem_im = dict(a._im)
    bterms = [(m, b.coefficient(m)) for m in b.monomials() if m != lm_b]
    heap = [-m for m in set(rem_re) | set(rem_im)]
    heapq.heapify(heap)
    q_re: dict[int, mpq] = {}
    q_im: dict[int, mpq] = {}
    o_re: dict[int, mpq] = {}
    o_im: dict[int, mpq] = {}
    while heap:
        m = -heapq.heappop(heap)
        cr = rem_re.pop(m, _Z)
        ci = rem_im.pop(m, _Z)
        if not cr and not ci:
            continue
        while heap and heap[0] == -m:
            heapq.heappop(heap)
        if divides(lm_b, m):
            q = GaussianRational._raw(cr, ci) * lc_inv
            shift = m - lm_b
            if q.re:
                q_re[shift] = q.re
            if q.im:
                q_im[shift] = q.im
            for bm, bc in bterms:
                t = bm + shift
                prod = q * bc
                if t not in rem_re and t not in rem_im:
                    heapq.heappush(heap, -t)
                if prod.re:
                    rem_re[t] = rem_re.get(t, _Z) - prod.re
                if prod.im:
                    rem_im[t] = rem_im.get(t, _Z) - prod.im
        else:
            if exact:
                raise NotExactDivision(f"{ring.monomial_str(m)} not divisible by leading monomial")
            if cr:
                o_re[m] = cr
            if ci:
                o_im[m] = ci
    return (
        MultiPoly._make(ring, _clean(q_re), _clean(q_im)),
        MultiPoly._make(ring, _clean(o_re), _clean(o_im)),
    )
