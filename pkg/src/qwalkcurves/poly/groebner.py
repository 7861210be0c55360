"""Buchberger's algorithm with the Gebauer–Möller criteria.

Pairs are selected by the normal strategy (smallest lcm of leading monomials
first).  The default order is the ring's lexicographic order; a block order
(graded reverse lexicographic inside each block) can be supplied for
elimination problems that are out of reach under pure lex.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .budget import Budget, BudgetExceeded
from .gaussian import GaussianRational
from .multipoly import MultiPoly, PolyRing, Variable

_SLOT = (1 << 16) - 1


class MonomialOrder:
    """Monomial order on packed monomials; ``key(m)`` is larger for larger monomials."""

    name = "abstract"

    def key(self, m: int):
        raise NotImplementedError

    def neg_key(self, m: int):
        raise NotImplementedError


class LexOrder(MonomialOrder):
    """``lambda > x1 > ... > xd > X1 > ... > Xd`` lexicographic, the ring's native order."""

    name = "lex"

    def key(self, m: int) -> int:
        return m

    def neg_key(self, m: int) -> int:
        return -m


class BlockOrder(MonomialOrder):
    """Product of graded reverse lexicographic orders on consecutive variable blocks.

    Parameters
    ----------
    ring : PolyRing
    blocks : sequence of sequences of Variable
        Earlier blocks dominate.  Every variable of the ring must appear once.
    """

    name = "block-grevlex"

    def __init__(self, ring: PolyRing, blocks: Sequence[Sequence[Variable]]):
        seen = [ring.index(v) for b in blocks for v in b]
        if sorted(seen) != list(range(ring.nvars)):
            raise ValueError("blocks must partition the ring variables")
        self.ring = ring
        self.blocks = [tuple(ring.shifts[ring.index(v)] for v in b) for b in blocks]
        self._cache: dict[int, tuple] = {}

    def key(self, m: int) -> tuple:
        k = self._cache.get(m)
        if k is None:
            parts = []
            for shifts in self.blocks:
                exps = [(m >> s) & _SLOT for s in shifts]
                parts.append(sum(exps))
                parts.extend(-e for e in reversed(exps))
            k = tuple(parts)
            self._cache[m] = k
        return k

    def neg_key(self, m: int) -> tuple:
        return tuple(-k for k in self.key(m))


@dataclass
class _Poly:
    terms: dict  # mono -> coefficient (mpq or GaussianRational)
    lm: int


def _to_internal(p: MultiPoly, complex_mode: bool) -> dict:
    if complex_mode:
        return {m: c for m, c in p.items()}
    return dict(p._re)


def _to_multipoly(ring: PolyRing, terms: dict, complex_mode: bool) -> MultiPoly:
    if complex_mode:
        re = {m: c.re for m, c in terms.items() if c.re}
        im = {m: c.im for m, c in terms.items() if c.im}
        return MultiPoly._make(ring, re, im)
    return MultiPoly._make(ring, dict(terms), {})


def _leading(terms: dict, order: MonomialOrder) -> int:
    return max(terms, key=order.key)


def _reduce(
    terms: dict,
    basis: list[_Poly],
    ring: PolyRing,
    order: MonomialOrder,
    budget: Budget,
    zero,
) -> dict:
    """Full reduction of ``terms`` modulo ``basis`` (all monic)."""
    divides = ring.divides
    terms = dict(terms)
    heap = [(order.neg_key(m), m) for m in terms]
    heapq.heapify(heap)
    rem: dict = {}
    steps = 0
    while heap:
        _, m = heapq.heappop(heap)
        c = terms.pop(m, None)
        if c is None or not c:
            continue
        for g in basis:
            if divides(g.lm, m):
                shift = m - g.lm
                for gm, gc in g.terms.items():
                    if gm == g.lm:
                        continue
                    t = gm + shift
                    old = terms.get(t)
                    if old is None:
                        terms[t] = zero - c * gc
                        heapq.heappush(heap, (order.neg_key(t), t))
                    else:
                        terms[t] = old - c * gc
                steps += 1
                if steps % 256 == 0:
                    budget.check_time()
                    budget.check_terms(len(terms) + len(rem), "reduction intermediate")
                break
        else:
            rem[m] = c
    return rem


def _monic(terms: dict, order: MonomialOrder) -> _Poly:
    lm = _leading(terms, order)
    inv = 1 / terms[lm]
    return _Poly({m: c * inv for m, c in terms.items()}, lm)


def _spoly(f: _Poly, g: _Poly, ring: PolyRing, zero) -> dict:
    lcm = ring.lcm(f.lm, g.lm)
    sf = lcm - f.lm
    sg = lcm - g.lm
    out = {m + sf: c for m, c in f.terms.items() if m != f.lm}
    for m, c in g.terms.items():
        if m == g.lm:
            continue
        t = m + sg
        out[t] = out.get(t, zero) - c
    return {m: c for m, c in out.items() if c}


def _update(G: set, B: set, ih: int, polys: list[_Poly], ring: PolyRing):
    """Gebauer–Möller installation of a new basis element ``ih``."""
    lcm = ring.lcm
    divides = ring.divides
    mh = polys[ih].lm

    C = set(G)
    D = set()
    while C:
        ig = C.pop()
        mg = polys[ig].lm
        lhg = lcm(mh, mg)

        def lcm_divides(ip):
            return divides(lcm(mh, polys[ip].lm), lhg)

        if mh + mg == lhg or (
            not any(lcm_divides(ipx) for ipx in C) and not any(lcm_divides(pr[1]) for pr in D)
        ):
            D.add((ih, ig))

    E = set()
    for pair in D:
        mg = polys[pair[1]].lm
        if mh + mg != lcm(mh, mg):
            E.add(pair)

    B_new = set()
    for ig1, ig2 in B:
        mg1 = polys[ig1].lm
        mg2 = polys[ig2].lm
        l12 = lcm(mg1, mg2)
        if not divides(mh, l12) or lcm(mg1, mh) == l12 or lcm(mg2, mh) == l12:
            B_new.add((ig1, ig2))
    B_new |= E

    G_new = {ig for ig in G if not divides(mh, polys[ig].lm)}
    G_new.add(ih)
    return G_new, B_new


def buchberger(
    system: Sequence[MultiPoly],
    budget: Budget | None = None,
    order: MonomialOrder | None = None,
) -> list[MultiPoly]:
    """Reduced Gröbner basis of the ideal generated by ``system``.

    Parameters
    ----------
    system : sequence of MultiPoly
        Nonempty; all in the same ring.
    budget : Budget, optional
        ``max_steps`` caps the number of S-polynomial reductions, ``seconds``
        the wall-clock time and ``max_terms`` the size of any intermediate
        polynomial.
    order : MonomialOrder, optional
        Defaults to :class:`LexOrder`.

    Returns
    -------
    list of MultiPoly
        Monic, interreduced, sorted by increasing leading monomial.

    Raises
    ------
    BudgetExceeded
        With ``partial`` set to the (non-reduced) basis found so far.
    """
    system = [p for p in system if not p.is_zero()]
    if not system:
        raise ValueError("buchberger needs a nonempty system")
    ring = system[0].ring
    order = order or LexOrder()
    budget = budget or Budget()
    if budget._deadline is None:
        budget = budget.start()
    complex_mode = any(not p.is_real() for p in system)
    zero = GaussianRational(0) if complex_mode else mpq(0)

    polys: list[_Poly] = []
    G: set[int] = set()
    B: set[tuple[int, int]] = set()

    def partial():
        return [_to_multipoly(ring, polys[i].terms, complex_mode) for i in sorted(G)]

    def current_basis():
        return [polys[i] for i in sorted(G, key=lambda i: order.key(polys[i].lm))]

    def install(terms):
        nonlocal G, B
        if not terms:
            return
        p = _monic(terms, order)
        if p.lm == 0:
            polys.append(p)
            G, B = {len(polys) - 1}, set()
            return True
        polys.append(p)
        G, B = _update(G, B, len(polys) - 1, polys, ring)
        return False

    unit = False
    for p in sorted(system, key=lambda q: order.key(_leading(_to_internal(q, complex_mode), order))):
        r = _reduce(_to_internal(p, complex_mode), current_basis(), ring, order, budget, zero)
        if install(r):
            unit = True
            break

    steps = 0
    try:
        while B and not unit:
            budget.check_time()
            steps += 1
            if steps > budget.max_steps:
                raise BudgetExceeded(
                    "steps", f"Buchberger exceeded {budget.max_steps} pair reductions", partial()
                )
            pair = min(B, key=lambda pr: order.key(ring.lcm(polys[pr[0]].lm, polys[pr[1]].lm)))
            B.discard(pair)
            s = _spoly(polys[pair[0]], polys[pair[1]], ring, zero)
            if not s:
                continue
            r = _reduce(s, current_basis(), ring, order, budget, zero)
            if r:
                budget.check_terms(len(r), "basis element")
                unit = install(r) or unit
    except BudgetExceeded as exc:
        if exc.partial is None:
            exc.partial = partial()
        raise

    # minimal basis, then interreduce
    basis = [polys[i] for i in G]
    basis.sort(key=lambda q: order.key(q.lm))
    minimal: list[_Poly] = []
    for q in basis:
        if not any(ring.divides(o.lm, q.lm) for o in minimal):
            minimal.append(q)
    reduced = []
    for i, q in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        tail = {m: c for m, c in q.terms.items() if m != q.lm}
        tail = _reduce(tail, others, ring, order, budget, zero)
        tail[q.lm] = q.terms[q.lm]
        reduced.append(_to_multipoly(ring, tail, complex_mode))
    reduced.sort(key=lambda f: order.key(_leading(_to_internal(f, complex_mode), order)))
    return reduced


def leading_monomial(p: MultiPoly, order: MonomialOrder | None = None) -> int:
    order = order or LexOrder()
    return max(p.monomials(), key=order.key)


def reduce_by(p: MultiPoly, basis: Sequence[MultiPoly], order: MonomialOrder | None = None) -> MultiPoly:
    """Normal form of ``p`` modulo ``basis`` (basis need not be monic)."""
    order = order or LexOrder()
    ring = p.ring
    complex_mode = (not p.is_real()) or any(not b.is_real() for b in basis)
    zero = GaussianRational(0) if complex_mode else mpq(0)
    internal = [_monic(_to_internal(b, complex_mode), order) for b in basis if not b.is_zero()]
    r = _reduce(_to_internal(p, complex_mode), internal, ring, order, Budget().start(), zero)
    return _to_multipoly(ring, r, complex_mode)


def s_polynomial(f: MultiPoly, g: MultiPoly, order: MonomialOrder | None = None) -> MultiPoly:
    order = order or LexOrder()
    complex_mode = not (f.is_real() and g.is_real())
    zero = GaussianRational(0) if complex_mode else mpq(0)
    a = _monic(_to_internal(f, complex_mode), order)
    b = _monic(_to_internal(g, complex_mode), order)
    return _to_multipoly(f.ring, _spoly(a, b, f.ring, zero), complex_mode)


def is_groebner_basis(basis: Sequence[MultiPoly], order: MonomialOrder | None = None) -> bool:
    """Check that every S-polynomial reduces to zero (Buchberger's criterion)."""
    basis = [b for b in basis if not b.is_zero()]
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if not reduce_by(s_polynomial(basis[i], basis[j], order), basis, order).is_zero():
                return False
    return True


def elimination_polynomials(basis: Sequence[MultiPoly], keep: Sequence[Variable]) -> list[MultiPoly]:
    """Basis elements involving only the variables in ``keep``."""
    keep = set(keep)
    return [b for b in basis if set(b.variables_present()) <= keep and not b.is_constant()]
