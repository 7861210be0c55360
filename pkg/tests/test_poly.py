"""Exact arithmetic: Gaussian rationals, polynomials, resultants, factors and Gröbner bases."""

import time

import numpy as np
import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from qwalkcurves.bifurcate.curves import from_sympy, to_sympy
from qwalkcurves.poly import (
    UNLIMITED,
    BlockOrder,
    Budget,
    BudgetExceeded,
    GaussianRational,
    LexOrder,
    MultiPoly,
    NotExactDivision,
    PolyRing,
    buchberger,
    elimination_polynomials,
    gcd,
    is_groebner_basis,
    leading_coefficients_vanish,
    primitive_normalize,
    reduce_by,
    reduce_multiplicity,
    scalar_resultant,
    square_free_part,
    strip_known_factors,
    sylvester_resultant,
)

R = PolyRing(2)
NAMES = ("lambda", "x1", "x2", "X1", "X2")

small_ints = st.integers(-4, 4)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gaussians = st.builds(lambda a, b: GaussianRational(str(a), str(b)), rationals, rationals)


@st.composite
def polys(draw, variables=("x1", "x2"), max_terms=4, max_exp=2, complex_coeffs=False):
    n = draw(st.integers(1, max_terms))
    p = R.zero
    for _ in range(n):
        c = draw(small_ints) + (draw(small_ints) * 1j if complex_coeffs else 0)
        term = R.constant(GaussianRational(complex(c)) if complex_coeffs else c)
        for v in variables:
            e = draw(st.integers(0, max_exp))
            if e:
                term = term * R.gen(v, e)
        p = p + term
    return p


# -- Gaussian rationals ---------------------------------------------------------------------


@given(gaussians, gaussians, gaussians)
def test_gaussian_field_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    if b:
        assert (a / b) * b == a
        assert b * b.inverse() == GaussianRational(1)


@given(gaussians)
def test_gaussian_norm_and_conjugate(a):
    assert a * a.conjugate() == GaussianRational(a.norm())
    assert GaussianRational.from_json(a.to_json()) == a


def test_gaussian_parsing_and_display():
    z = GaussianRational("1/2", "-3/4")
    assert str(z) == "(1/2 - 3/4*i)"
    assert GaussianRational(1, 2) * GaussianRational("1/2", -1) == GaussianRational("5/2", 0)
    assert complex(GaussianRational(0, 1) ** 2) == -1
    assert hash(GaussianRational(2)) == hash(GaussianRational("4/2"))


# -- polynomials ----------------------------------------------------------------------------


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r
    assert (p - p).is_zero()


@given(polys(complex_coeffs=True), polys(complex_coeffs=True))
def test_product_rule_and_exact_division(p, q):
    for v in ("x1", "x2"):
        assert (p * q).diff(v) == p.diff(v) * q + p * q.diff(v)
    assume(not q.is_zero())
    assert (p * q).exquo(q) == p


@given(polys(), st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), st.floats(-2, 2))
def test_evaluation_consistency(p, a, b):
    point = {"x1": a, "x2": b}
    direct = p.evaluate(point)
    vectorized = complex(p.evaluate_array({"x1": np.array([a]), "x2": np.array([b])})[0])
    assert abs(direct - vectorized) <= 1e-9 * (1 + abs(direct))
    via_sympy = complex(to_sympy(p).subs({sympy.Symbol("x1"): a, sympy.Symbol("x2"): b}))
    assert abs(direct - via_sympy) <= 1e-9 * (1 + abs(direct))


@given(polys(variables=("lambda", "x1", "X1")))
def test_json_and_sympy_round_trip(p):
    assert MultiPoly.from_json(R, p.to_json()) == p
    assert from_sympy(R, to_sympy(p)) == p


@given(polys(variables=("lambda", "x1", "X2"), complex_coeffs=True))
def test_printed_form_parses_back(p):
    assert R.parse(str(p)) == p


def test_parse_accepts_paper_notation():
    p = R.parse("2*x1*x2*lambda^2 + (x1*x2 + 1)*(x1 + x2)*lambda + 2*x1*x2")
    assert len(p) == 6
    assert p.degree("lambda") == 2
    assert R.parse("i*X1 - 1/2") == R.gen("X1").scale(GaussianRational(0, 1)) - GaussianRational("1/2")
    with pytest.raises(ValueError):
        R.parse("x1 / x2")


def test_exquo_raises_on_remainder():
    with pytest.raises(NotExactDivision):
        R.parse("x1^2 + 1").exquo(R.parse("x1 - 1"))


def test_substitute_and_coefficients():
    p = R.parse("lambda^2*x1 + lambda - 3")
    assert p.substitute("lambda", 2) == R.parse("4*x1 - 1")
    coeffs = p.coefficients_in("lambda")
    assert coeffs[2] == R.gen("x1") and coeffs[0] == R.constant(-3)


units = st.sampled_from([GaussianRational(1), GaussianRational(-1), GaussianRational(0, 1), GaussianRational(0, -1)])


@given(polys(complex_coeffs=True), rationals, units)
def test_primitive_normalize_is_scale_invariant(p, r, u):
    assume(not p.is_zero() and r)
    c = GaussianRational(str(r)) * u
    assert primitive_normalize(p.scale(c)) == primitive_normalize(p)


# -- resultants -----------------------------------------------------------------------------


def test_linear_resultant_is_ad_minus_bc():
    ring = PolyRing(2)
    f = ring.parse("X1*x1 + X2")  # a x + b with a = X1, b = X2
    g = ring.parse("lambda*x1 + x2")  # c x + d
    expected = ring.parse("X1*x2 - X2*lambda")
    for method in ("bareiss", "interpolate"):
        assert sylvester_resultant(f, g, "x1", method=method) == expected


def test_degenerate_linear_case_overrepresents():
    # with a = c = 0 the polynomials are constants b and d, which have no common
    # root, yet the specialized resultant a*d - b*c is zero
    ring = PolyRing(2)
    f = ring.parse("X1*x1 + X2")
    g = ring.parse("lambda*x1 + x2")
    res = sylvester_resultant(f, g, "x1")
    assignment = {"X1": 0, "lambda": 0}
    value = res
    for v, c in assignment.items():
        value = value.substitute(v, c)
    assert value.is_zero()
    assert leading_coefficients_vanish(f, g, "x1", assignment)


@given(polys(("x1", "x2"), max_terms=3), polys(("x1", "x2"), max_terms=3))
def test_resultant_matches_sympy(f, g):
    assume(f.degree("x1") > 0 and g.degree("x1") > 0)
    ours = sylvester_resultant(f, g, "x1")
    x1 = sympy.Symbol("x1")
    theirs = sympy.resultant(to_sympy(f), to_sympy(g), x1)
    assert ours == from_sympy(R, theirs)


@given(
    polys(("x1", "x2"), max_terms=3, complex_coeffs=True),
    polys(("x1", "X1"), max_terms=3, complex_coeffs=True),
)
def test_resultant_routes_agree(f, g):
    assume(f.degree("x1") > 0 and g.degree("x1") > 0)
    a = sylvester_resultant(f, g, "x1", method="bareiss")
    if f.is_real() and g.is_real():
        assert a == sylvester_resultant(f, g, "x1", method="interpolate")
    assert a == sylvester_resultant(f, g, "x1")


def test_resultant_vanishes_on_common_root():
    f = R.parse("(x1 - x2)*(x1 + 3)")
    g = R.parse("(x1 - x2)*(x1 - X1)")
    assert sylvester_resultant(f, g, "x1").is_zero()
    h = R.parse("x1 - 2")
    assert sylvester_resultant(f, h, "x1") == R.parse("(2 - x2)*5")


def test_scalar_resultant():
    # Res(x^2 - 1, x - 2) = 3
    assert scalar_resultant([1, 0, -1], [1, -2]) == GaussianRational(3)
    assert scalar_resultant([1, 0, 1], [1, GaussianRational(0, -1)]) == GaussianRational(0)


def test_resultant_budget_and_validation():
    f = R.parse("x1^6*x2^6 + X1")
    g = R.parse("x1^6 + x2^7*X2^5")
    with pytest.raises(BudgetExceeded) as info:
        sylvester_resultant(f, g, "x1", budget=Budget(max_degree=10))
    assert info.value.reason == "degree"
    with pytest.raises(ValueError):
        sylvester_resultant(R.parse("x2 + 1"), g, "x1")


# -- factors --------------------------------------------------------------------------------


@given(polys(max_terms=3), polys(max_terms=3), polys(max_terms=2))
def test_gcd_divides_and_recovers_common_factor(a, b, c):
    assume(not (a.is_zero() or b.is_zero() or c.is_zero()))
    g = gcd(a * c, b * c)
    assert g.divides(a * c) and g.divides(b * c)
    assert c.divides(g)


def test_square_free_part_and_multiplicity():
    f = R.parse("(x1 + x2)^3*(x1*x2 - 1)^2*(X1 + 1)")
    assert square_free_part(f) == R.parse("(x1 + x2)*(x1*x2 - 1)*(X1 + 1)").monic()
    q, e, _ = reduce_multiplicity(R.parse("(x1^2 + x2 + 3)^3"))
    assert e == 3 and q == R.parse("x1^2 + x2 + 3").monic()


@given(polys(max_terms=3))
def test_strip_known_factors_reconstructs(p):
    assume(not p.is_zero())
    candidates = [R.parse("x1"), R.parse("x2 + 1"), R.parse("x1 - 1")]
    raw = p * R.parse("x1^2*(x2 + 1)")
    reduced, found = strip_known_factors(raw, candidates)
    back = reduced
    for f, m in found:
        back = back * f**m
    assert back == raw
    assert dict((str(f), m) for f, m in found).get("x1", 0) >= 2


# -- Gröbner bases --------------------------------------------------------------------------


def test_buchberger_matches_sympy_lex():
    system = [R.parse("x1^2 + x2^2 - 1"), R.parse("x1 - x2")]
    basis = buchberger(system, UNLIMITED, LexOrder())
    assert is_groebner_basis(basis, LexOrder())
    x1, x2 = sympy.symbols("x1 x2")
    theirs = sympy.groebner([x1**2 + x2**2 - 1, x1 - x2], x1, x2, order="lex")
    assert {b.monic() for b in basis} == {from_sympy(R, g).monic() for g in theirs.exprs}


def test_elimination_with_block_order():
    # eliminate x1 from the twisted cubic x2 = x1^2, X1 = x1^3
    system = [R.parse("x2 - x1^2"), R.parse("X1 - x1^3")]
    order = BlockOrder(R, [[R.x(1)], [R.lam, R.x(2), R.X(1), R.X(2)]])
    basis = buchberger(system, UNLIMITED, order)
    elim = elimination_polynomials(basis, [R.x(2), R.X(1)])
    assert [e.monic() for e in elim] == [R.parse("X1^2 - x2^3").monic()]
    assert reduce_by(R.parse("x2^3 - X1^2"), basis, order).is_zero()


@given(polys(max_terms=3), polys(max_terms=3))
def test_buchberger_ideal_membership(f, g):
    assume(not f.is_zero() and not g.is_zero())
    basis = buchberger([f, g], Budget(max_steps=200, seconds=10))
    assert is_groebner_basis(basis)
    assert reduce_by(f * R.parse("x1 + 2") + g * R.parse("x2"), basis).is_zero()


def test_buchberger_budget_reports_partial_basis():
    system = [R.parse("x1^3*x2 - X1"), R.parse("x2^3*x1 - X2"), R.parse("x1*x2*X1 - 1")]
    with pytest.raises(BudgetExceeded) as info:
        buchberger(system, Budget(max_steps=1))
    assert info.value.reason == "steps"
    assert info.value.partial


def test_budget_clock():
    b = Budget(seconds=0).start()
    time.sleep(0.01)
    with pytest.raises(BudgetExceeded):
        b.check_time()
    UNLIMITED.start().check_time()
