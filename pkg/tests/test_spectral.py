"""Characteristic polynomials, eigenphase gradients and the sampled locus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cached_char_poly
from qwalkcurves.spectral import (
    DegenerateSampleError,
    ParametricLocus,
    closed_form_gradients,
    eigenphases,
    eigenvalues,
    grad_H,
    multiplier_matrix,
    numeric_hessian,
    palindromic_form,
    quadratic_grad,
    quartic_sign_choice,
    symmetric_quartic_grad,
    trace_locus,
)
from qwalkcurves.walks import ZOO_NAMES, zoo

angles = st.floats(-np.pi, np.pi, allow_nan=False)


def phase_gradient_fd(w, theta, lam0, h=1e-6):
    """Central differences of arg λ along the branch through ``lam0``."""
    out = np.empty(w.d)
    for k in range(w.d):
        phases = []
        for s in (1, -1):
            th = np.array(theta, dtype=float)
            th[k] += s * h
            vals = eigenvalues(w, th)
            phases.append(np.angle(vals[np.argmin(np.abs(vals - lam0))]))
        out[k] = np.angle(np.exp(1j * (phases[0] - phases[1]))) / (2 * h)
    return out


def well_separated(vals, m, gap=1e-3):
    others = np.delete(vals, m)
    return np.min(np.abs(others - vals[m])) > gap


@pytest.mark.parametrize("name", ZOO_NAMES)
def test_char_poly_matches_numeric_determinant(name):
    w = zoo(name)
    cp = cached_char_poly(name)
    ring = cp.ring
    rng = np.random.default_rng(1)
    ratios = []
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, 2)
        lam = complex(rng.normal(), rng.normal())
        m = multiplier_matrix(w).numeric(theta)
        det = np.linalg.det(m - lam * np.eye(w.n)) * np.prod(np.exp(1j * theta * np.array(cp.clearing)))
        full = cp.full.evaluate({ring.lam: lam, ring.x(1): np.exp(1j * theta[0]), ring.x(2): np.exp(1j * theta[1])})
        ratios.append(det / full)
    assert np.allclose(ratios, ratios[0], rtol=1e-9)


@pytest.mark.parametrize("name", ZOO_NAMES)
def test_eigenvalues_are_roots_of_the_factors(name):
    w = zoo(name)
    cp = cached_char_poly(name)
    ring = cp.ring
    theta = np.array([0.37, -1.21])
    xs = {ring.x(1): np.exp(1j * theta[0]), ring.x(2): np.exp(1j * theta[1])}
    trivial = [r for r, m in cp.trivial_roots() for _ in range(m)]
    for lam in eigenvalues(w, theta):
        assert abs(abs(lam) - 1) < 1e-12
        on_p = abs(cp.p.evaluate({ring.lam: lam, **xs})) < 1e-9
        on_trivial = any(abs(lam - r) < 1e-9 for r in trivial)
        assert on_p or on_trivial
    assert cp.p.degree(ring.lam) + len(trivial) == w.n


def test_trivial_factor_split():
    assert [str(f) for f, _ in cached_char_poly("grover4").trivial] == ["lambda - 1", "lambda + 1"]
    assert [str(f) for f, _ in cached_char_poly("grover5").trivial] == ["lambda - 1"]
    assert cached_char_poly("triangular").trivial == []
    assert cached_char_poly("hexagonal").even_in_lambda()


@settings(max_examples=25)
@given(st.sampled_from(ZOO_NAMES), angles, angles)
def test_grad_H_matches_finite_differences(name, t1, t2):
    w, cp = zoo(name), cached_char_poly(name)
    theta = np.array([t1, t2])
    vals = eigenvalues(w, theta)
    for m, lam in enumerate(vals):
        if not well_separated(vals, m):
            continue
        try:
            g = grad_H(w, theta, m, cp)
        except DegenerateSampleError:
            continue
        assert np.allclose(g, phase_gradient_fd(w, theta, lam), atol=1e-5)


@pytest.mark.parametrize("name", ["grover4", "grover5", "hexagonal", "hadamard4"])
def test_closed_forms_agree_with_grad_H(name):
    w, cp = zoo(name), cached_char_poly(name)
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(40):
        theta = rng.uniform(-np.pi, np.pi, 2)
        try:
            pairs = closed_form_gradients(cp, theta)
        except DegenerateSampleError:
            continue
        vals = eigenvalues(w, theta)
        for lam, g in pairs:
            m = int(np.argmin(np.abs(vals - lam)))
            assert abs(vals[m] - lam) < 1e-9
            assert np.allclose(g, grad_H(w, theta, m, cp), atol=1e-8)
            checked += 1
    assert checked > 40


def test_closed_forms_need_a_palindromic_factor():
    assert palindromic_form(cached_char_poly("triangular")) is None
    with pytest.raises(ValueError):
        closed_form_gradients(cached_char_poly("triangular"), [0.1, 0.2])


def test_closed_form_degeneracies_raise():
    with pytest.raises(DegenerateSampleError):
        quadratic_grad(2.5, np.array([1.0, 0.0]))
    with pytest.raises(DegenerateSampleError):
        symmetric_quartic_grad(0.0, 3.0, np.zeros(2), np.zeros(2))  # x^2 - 4y + 8 < 0
    with pytest.raises(DegenerateSampleError):
        symmetric_quartic_grad(2.0, 3.0, np.zeros(2), np.zeros(2))  # 2a = x
    assert np.allclose(quadratic_grad(0.0, np.array([2.0, -4.0]), upper=False), [-1.0, 2.0])


def test_numeric_hessian_is_symmetric():
    w = zoo("grover4")
    vals = eigenvalues(w, [0.4, 1.1])
    m = int(np.argmax(np.abs(vals.imag)))  # a nontrivial eigenvalue (the trivial ones are ±1)
    h = numeric_hessian(w, [0.4, 1.1], m)
    assert np.allclose(h, h.T)
    assert np.all(np.isfinite(h))


@pytest.fixture(scope="module")
def grover4_locus():
    return trace_locus(zoo("grover4"), 64)


def test_locus_invariants(grover4_locus):
    loc = grover4_locus
    k = 2  # nontrivial branches
    assert len(loc) + sum(loc.dropped.values()) == k * 64 * 64
    assert np.isfinite(loc.X).all()
    assert set(np.unique(loc.hessian_sign)) <= {-1, 0, 1}
    assert set(np.unique(loc.branch)) == {0, 1}
    assert (2 * (loc.X**2).sum(axis=1) <= 1 + 1e-6).all()
    assert np.allclose(np.abs(loc.eigenvalue), 1)


def test_locus_samples_match_grad_H(grover4_locus):
    loc = grover4_locus
    w, cp = zoo("grover4"), cached_char_poly("grover4")
    for i in range(0, len(loc), 997):
        vals = eigenvalues(w, loc.theta[i])
        m = int(np.argmin(np.abs(vals - loc.eigenvalue[i])))
        assert np.allclose(grad_H(w, loc.theta[i], m, cp), loc.X[i], atol=1e-9)


def test_locus_csv_round_trip(grover4_locus, tmp_path):
    path = tmp_path / "locus.csv"
    grover4_locus.to_csv(path)
    back = ParametricLocus.read_csv(path)
    assert back.resolution == 64
    assert np.array_equal(back.X, grover4_locus.X)
    assert np.array_equal(back.theta, grover4_locus.theta)
    assert np.array_equal(back.hessian_sign, grover4_locus.hessian_sign)
    half = grover4_locus.subset(grover4_locus.branch == 0)
    assert len(half) == (grover4_locus.branch == 0).sum()


def test_quartic_sign_choice_matches_closed_form():
    w, cp = zoo("grover5"), cached_char_poly("grover5")
    loc = trace_locus(w, 64, cp)
    choice = quartic_sign_choice(cp, loc.theta, loc.eigenvalue)
    assert set(np.unique(choice)) == {-1, 1}
    rng = np.random.default_rng(3)
    for i in rng.choice(len(loc), 30, replace=False):
        form = palindromic_form(cp)
        ring = cp.ring
        xs = {ring.x(1): np.exp(1j * loc.theta[i, 0]), ring.x(2): np.exp(1j * loc.theta[i, 1])}
        c = cp.p.coefficients_in(ring.lam)
        x = (c[3].evaluate(xs) / c[4].evaluate(xs) / form.rotation).real
        y = (c[2].evaluate(xs) / c[4].evaluate(xs) / form.rotation**2).real
        a = (x + choice[i] * np.sqrt(max(x * x - 4 * y + 8, 0))) / 2
        mu = loc.eigenvalue[i] / form.rotation
        assert abs(mu**2 + a * mu + 1) < 1e-6
    with pytest.raises(ValueError):
        quartic_sign_choice(cached_char_poly("triangular"), loc.theta[:2], loc.eigenvalue[:2])


def test_eigenphases_are_sorted_principal_values():
    ph = eigenphases(zoo("hadamard4"), [0.3, 2.0])
    assert (np.diff(ph) >= 0).all() and (ph > -np.pi).all() and (ph <= np.pi).all()
