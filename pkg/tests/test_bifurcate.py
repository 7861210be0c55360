"""Polynomial systems, the resultant chain, the Gröbner route and curve validation."""

import numpy as np
import pytest

from conftest import cached_char_poly
from qwalkcurves.bifurcate import (
    FULL,
    NAIVE,
    BifurcationCurve,
    GroebnerBudgetExceeded,
    build_system,
    eliminate_chain,
    exp_hessian,
    groebner_eliminate,
    preferred_mode,
    stationary_equations,
    validate_curves,
)
from qwalkcurves.bifurcate.chain import EXHAUSTED, FAILED, unit_circle_roots
from qwalkcurves.bifurcate.curves import (
    OVERREPRESENTED,
    UNKNOWN,
    VALIDATED,
    curve_points,
    fold_points,
    irreducible_factors,
)
from qwalkcurves.bifurcate.groebner_route import hessian_branches
from qwalkcurves.poly import Budget, PolyRing, primitive_normalize
from qwalkcurves.spectral import eigenvalues, grad_H, trace_locus
from qwalkcurves.walks import zoo

R = PolyRing(2)


def leaf_set(tree, substitution="any"):
    return {primitive_normalize(n.polynomial) for n in tree.leaves(substitution)}


# -- systems --------------------------------------------------------------------------------


def test_stationary_equations_vanish_on_the_locus():
    cp = cached_char_poly("grover4")
    w = zoo("grover4")
    theta = np.array([0.7, -0.4])
    vals = eigenvalues(w, theta)
    m = int(np.argmax(np.abs(vals.imag)))
    X = grad_H(w, theta, m, cp)
    point = {R.lam: vals[m], R.x(1): np.exp(1j * theta[0]), R.x(2): np.exp(1j * theta[1]), R.X(1): X[0], R.X(2): X[1]}
    for s in stationary_equations(cp):
        assert abs(s.evaluate(point)) < 1e-10


@pytest.mark.parametrize("name", ["grover4", "triangular", "hadamard4"])
def test_hessian_numerator_contains_p_lambda(name):
    cp = cached_char_poly(name)
    h = exp_hessian(cp, normalize=False)
    p_lam, _ = cp.p.diff(R.lam).strip_monomial_content()
    assert p_lam.divides(h)


def test_build_system_modes():
    cp = cached_char_poly("grover4")
    naive = build_system(cp, NAIVE)
    assert naive.polynomials[3] == cp.p.diff(R.lam)
    assert naive.order == [R.x(1), R.x(2), R.lam] and naive.bases == [0, 1]
    full = build_system(cp, FULL)
    assert len(full.polynomials[3]) == 124
    with pytest.raises(ValueError):
        build_system(cp, "other")


def test_preferred_mode():
    assert preferred_mode(cached_char_poly("grover4")) == FULL
    for name in ("grover5", "triangular", "hexagonal", "hadamard4"):
        assert preferred_mode(cached_char_poly(name)) == NAIVE


# -- resultant chain ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def grover4_tree():
    return eliminate_chain(build_system(cached_char_poly("grover4"), NAIVE))


def test_chain_produces_the_grover4_circle(grover4_tree):
    circle = primitive_normalize(R.parse("2*X1^2 + 2*X2^2 - 1"))
    assert circle in leaf_set(grover4_tree, R.one.constant_coefficient())
    assert circle in leaf_set(grover4_tree, -R.one.constant_coefficient())


def test_chain_tree_invariants(grover4_tree):
    tree = grover4_tree
    assert tree.check_reconstruction()
    assert [n.id for n in tree.stage(0)] == ["P1", "P2", "P3", "P4"]
    assert tree["A4"].status == EXHAUSTED  # Res(p_λ, p) is a pure λ, x2 product
    for leaf in tree.leaves():
        path = tree.path(leaf.id)
        assert path[0] == "P1" and path[-1] == leaf.id
        assert set(leaf.polynomial.variables_present()) <= {R.X(1), R.X(2)}
    assert tree.failures() == []
    assert {n["id"] for n in tree.to_json()} == set(tree.nodes)


def test_chain_records_budget_failures_per_node():
    tree = eliminate_chain(build_system(cached_char_poly("triangular"), NAIVE), Budget(max_terms=50, max_degree=512))
    failed = tree.failures()
    assert failed and all(n.status == FAILED and n.note for n in failed)
    assert tree.check_reconstruction()


def test_chain_triangular_ellipse():
    tree = eliminate_chain(build_system(cached_char_poly("triangular"), NAIVE))
    assert primitive_normalize(R.parse("4*X1^2 + 3*X2^2 + 2*X2 - 1")) in leaf_set(tree)
    curves = tree.curves()
    assert len({c.f for c in curves}) == len(curves)


def test_unit_circle_roots():
    roots = unit_circle_roots(R.parse("(lambda^2 + 1)*(lambda - 3)"))
    assert sorted(np.round(roots.imag, 12)) == [-1, 1]
    assert len(unit_circle_roots(R.parse("15*lambda^4 + 20*lambda^3 + 58*lambda^2 + 20*lambda + 15"))) == 0


# -- Gröbner route --------------------------------------------------------------------------


def test_groebner_naive_system_gives_circle_and_tangent_line():
    curves = groebner_eliminate(build_system(cached_char_poly("grover4"), NAIVE))
    found = {primitive_normalize(c.f) for c in curves}
    assert primitive_normalize(R.parse("2*X1^2 + 2*X2^2 - 1")) in found
    assert primitive_normalize(R.parse("X1 + X2 - 1")) in found
    assert all(c.provenance[0] == "groebner" for c in curves)


def test_hessian_branches_split_off_p_lambda():
    sys = build_system(cached_char_poly("grover4"), FULL)
    branches = hessian_branches(sys)
    assert set(branches) == {"p_lambda", "core"}
    assert branches["p_lambda"] == cached_char_poly("grover4").p.diff(R.lam).strip_monomial_content()[0]


def test_groebner_budget_exhaustion_advises_the_chain():
    sys = build_system(cached_char_poly("grover4"), FULL)
    with pytest.raises(GroebnerBudgetExceeded, match="eliminate_chain"):
        groebner_eliminate(sys, Budget(max_terms=20_000, max_steps=5))


# -- curves and validation ------------------------------------------------------------------


def test_curve_requires_spatial_variables():
    with pytest.raises(ValueError):
        BifurcationCurve(R.parse("X1 + x1"))
    with pytest.raises(ValueError):
        BifurcationCurve(R.constant(3))
    c = BifurcationCurve(R.parse("2*X1^2 + 2*X2^2 - 1"), ("P1",))
    assert c.f == R.parse("X1^2 + X2^2 - 1/2")
    assert c.contains(np.array([[0.1, 0.1], [0.8, 0.0]])).tolist() == [True, False]
    assert c.to_json()["status"] == UNKNOWN
    with pytest.raises(ValueError):
        BifurcationCurve(R.parse("X1^2 + X2")).contains(np.zeros((1, 2)))


def test_irreducible_factors():
    factors = irreducible_factors(R.parse("(X1 + X2 - 1)^2*(2*X1^2 + 2*X2^2 - 1)"))
    assert sorted((str(f), m) for f, m in factors) == [("X1 + X2 - 1", 2), ("X1^2 + X2^2 - 1/2", 1)]
    assert len(irreducible_factors(R.parse("X1^2 + X2^2"))) == 1  # irreducible over ℚ
    # non-real input is factored over ℚ(i)
    split = irreducible_factors(R.parse("(X1 + i*X2)*(X1 - i*X2 + 1)"))
    assert sorted(str(f) for f, _ in split) == sorted(["X1 + i*X2", "X1 - i*X2 + 1"])


def test_curve_points_lie_on_the_curve():
    c = BifurcationCurve(R.parse("X1^2 + 3*X2^2 - 1"))
    pts = curve_points(c, (-1.2, 1.2, -1.2, 1.2), 256)
    assert len(pts) > 100
    assert np.max(np.abs(c(pts))) < 1e-3
    far = BifurcationCurve(R.parse("X1^2 + X2^2 + 1"))
    assert len(curve_points(far, (-1, 1, -1, 1), 64)) == 0


@pytest.fixture(scope="module")
def grover4_locus():
    return trace_locus(zoo("grover4"), 256)


def test_fold_points_trace_the_grover4_circle(grover4_locus):
    folds = fold_points(grover4_locus)
    r2 = 2 * (folds**2).sum(axis=1)
    assert len(folds) > 100
    assert np.quantile(r2, 0.9) > 0.98


def test_validation_statuses(grover4_locus):
    curves = [
        BifurcationCurve(R.parse("2*X1^2 + 2*X2^2 - 1")),
        BifurcationCurve(R.parse("X1 + X2 - 1")),
        BifurcationCurve(R.parse("X1^2 + X2^2 + 1")),
    ]
    validate_curves(curves, grover4_locus)
    assert [c.status for c in curves] == [VALIDATED, OVERREPRESENTED, UNKNOWN]
    assert curves[0].score >= 0.8 and curves[1].score < 0.8 and curves[2].score is None


@pytest.mark.slow
def test_grover5_full_mode_runs_out_of_time():
    sys = build_system(cached_char_poly("grover5"), FULL)
    with pytest.raises(GroebnerBudgetExceeded):
        groebner_eliminate(sys, Budget(max_terms=20_000, max_degree=64, max_steps=10_000, seconds=5))
