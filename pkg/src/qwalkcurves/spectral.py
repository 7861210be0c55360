"""Multiplier matrices, characteristic polynomials and the locus ``X = ∇H(θ)``.

With ``x_k = e^{iθ_k}`` the multiplier matrix is
``M(x) = diag(x^{σ_1}, ..., x^{σ_n}) U``; its characteristic polynomial,
cleared of negative exponents, is the polynomial ``p(λ; x)`` that feeds the
elimination pipeline.  Its unit-modulus roots ``λ_m = e^{iH_m}`` have
gradients

    ∂H_m/∂θ_j = -p_j x_j / (λ p_λ),

which is what :func:`grad_H` evaluates and :func:`trace_locus` samples.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .poly.factors import primitive_normalize
from .poly.gaussian import GaussianRational
from .poly.multipoly import MultiPoly, NotExactDivision, PolyRing
from .walks import WalkDefinition

CHAR_POLY_CAP = 8
DEGENERATE_TOL = 1e-8
COLLISION_GAP = 1e-6
DEFAULT_RESOLUTION = 512


class DegenerateSampleError(ArithmeticError):
    """The gradient formula is singular (or not real) at the requested sample."""


# -- multiplier matrix --------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierMatrix:
    """Entries ``U[j, k] · x^{Σ[j]}`` stored as (coefficient, Laurent exponent) pairs."""

    d: int
    coin: tuple[tuple[GaussianRational, ...], ...]
    directions: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.directions)

    def entry(self, j: int, k: int) -> tuple[GaussianRational, tuple[int, ...]]:
        return self.coin[j][k], self.directions[j]

    def numeric(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phases = np.exp(1j * (np.asarray(self.directions) @ theta))
        coin = np.array([[complex(c) for c in row] for row in self.coin])
        return phases[:, None] * coin

    def numeric_grid(self, theta: np.ndarray) -> np.ndarray:
        """Vectorized over a ``(..., d)`` array of angles; returns ``(..., n, n)``."""
        phases = np.exp(1j * (theta @ np.asarray(self.directions).T))
        coin = np.array([[complex(c) for c in row] for row in self.coin])
        return phases[..., :, None] * coin

    def __str__(self) -> str:
        rows = []
        for j in range(self.n):
            mono = _laurent_str(self.directions[j])
            rows.append("[" + ", ".join(f"({c})*{mono}" if mono != "1" else f"{c}" for c in self.coin[j]) + "]")
        return "\n".join(rows)


def _laurent_str(exps: Sequence[int]) -> str:
    parts = []
    for k, e in enumerate(exps, start=1):
        if e == 1:
            parts.append(f"x{k}")
        elif e:
            parts.append(f"x{k}^{e}")
    return "*".join(parts) or "1"


def multiplier_matrix(w: WalkDefinition) -> MultiplierMatrix:
    return MultiplierMatrix(w.d, w.require_exact(), w.directions)


# -- characteristic polynomial ---------------------------------------------------------


Laurent = dict  # exponent tuple (λ, x_1..x_d) -> GaussianRational


def _lmul(a: Laurent, b: Laurent) -> Laurent:
    out: Laurent = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            c = out.get(e)
            out[e] = ca * cb if c is None else c + ca * cb
    return {e: c for e, c in out.items() if c}


def _ladd(a: Laurent, b: Laurent, sign: int = 1) -> Laurent:
    out = dict(a)
    for e, c in b.items():
        prev = out.get(e)
        val = c if sign > 0 else -c
        out[e] = val if prev is None else prev + val
    return {e: c for e, c in out.items() if c}


def laurent_determinant(matrix: list[list[Laurent]], width: int) -> Laurent:
    """Determinant by Laplace expansion along rows, memoized on used-column sets.

    ``width`` is the length of the exponent tuples.
    """
    n = len(matrix)
    unit: Laurent = {(0,) * width: GaussianRational(1)}
    memo: dict[int, Laurent] = {}

    def minor(row: int, cols: int) -> Laurent:
        if row == n:
            return unit
        if cols in memo:
            return memo[cols]
        total: Laurent = {}
        sign = 1
        for col in range(n):
            if cols >> col & 1:
                continue
            entry = matrix[row][col]
            if entry:
                sub = minor(row + 1, cols | (1 << col))
                if sub:
                    total = _ladd(total, _lmul(entry, sub), sign)
            sign = -sign
        memo[cols] = total
        return total

    return minor(0, 0)


@dataclass
class CharPoly:
    """Characteristic polynomial of a walk, split into trivial and nontrivial parts.

    Attributes
    ----------
    p : MultiPoly
        Nontrivial part in ``(λ, x_1..x_d)``, scaled to coprime Gaussian
        integers.
    full : MultiPoly
        ``det(M − λI)`` times ``clearing``, monomial content removed, same
        normalization.  Equals ``p`` times the trivial factors up to a scalar.
    clearing : tuple of int
        Exponents of the Laurent monomial ``x^clearing`` multiplied in.
    trivial : list of (MultiPoly, int)
        λ-only factors and their multiplicities.
    n : int
        Coin dimension.
    """

    p: MultiPoly
    full: MultiPoly
    clearing: tuple[int, ...]
    trivial: list[tuple[MultiPoly, int]]
    n: int
    d: int = 2

    @property
    def ring(self) -> PolyRing:
        return self.p.ring

    @cached_property
    def derivatives(self) -> tuple[MultiPoly, list[MultiPoly]]:
        """``(p_λ, [p_{x_1}, ..., p_{x_d}])``."""
        ring = self.ring
        return self.p.diff(ring.lam), [self.p.diff(ring.x(k)) for k in range(1, self.d + 1)]

    def trivial_roots(self) -> list[tuple[complex, int]]:
        """Numeric roots of the trivial factors with multiplicities."""
        out = []
        for f, mult in self.trivial:
            coeffs = f.coefficients_in(self.ring.lam)
            deg = max(coeffs)
            poly = [complex(coeffs.get(k, self.ring.zero).constant_coefficient()) for k in range(deg, -1, -1)]
            for r in np.roots(poly):
                out.append((complex(r), mult))
        return out

    def even_in_lambda(self) -> bool:
        return all(k % 2 == 0 for k in self.p.coefficients_in(self.ring.lam))


def char_poly(w: WalkDefinition, cap: int = CHAR_POLY_CAP, seed: int = 0) -> CharPoly:
    """Exact ``det(M(x) − λI)`` with the clearing monomial and trivial factors split off.

    Raises
    ------
    ValueError
        If the coin dimension exceeds ``cap`` or the coin is not exact.
    """
    mm = multiplier_matrix(w)
    n, d = mm.n, mm.d
    if n > cap:
        raise ValueError(f"coin dimension {n} exceeds the cofactor-expansion cap {cap}")
    lam_e = (1,) + (0,) * d
    matrix: list[list[Laurent]] = []
    for j in range(n):
        row = []
        for k in range(n):
            entry: Laurent = {}
            c, mono = mm.entry(j, k)
            if c:
                entry[(0,) + tuple(mono)] = c
            if j == k:
                entry[lam_e] = entry.get(lam_e, GaussianRational(0)) - 1
            row.append({e: v for e, v in entry.items() if v})
        matrix.append(row)
    det = laurent_determinant(matrix, d + 1)
    if not det:
        raise ValueError("characteristic polynomial vanishes identically")
    clearing = tuple(max(0, -min(e[i + 1] for e in det)) for i in range(d))
    ring = PolyRing(d)
    terms = {}
    for e, c in det.items():
        exps = [e[0]] + [e[i + 1] + clearing[i] for i in range(d)] + [0] * d
        terms[tuple(exps)] = c
    raw = ring.from_terms(terms)
    stripped, _ = raw.strip_monomial_content()
    full = primitive_normalize(stripped)
    nontrivial, trivial = detect_trivial_factors(full, seed=seed)
    return CharPoly(primitive_normalize(nontrivial), full, clearing, trivial, n, d)


def detect_trivial_factors(
    p: MultiPoly, seed: int = 0, trials: int = 3, tol: float = 1e-9
) -> tuple[MultiPoly, list[tuple[MultiPoly, int]]]:
    """Split off factors ``λ − 1``, ``λ + 1`` and ``λ² + 1``.

    A candidate root ``c ∈ {1, −1, ±i}`` is accepted when ``p(c; x)`` vanishes
    at ``trials`` random unit-modulus specializations of ``x``; the matching
    minimal polynomial is then divided out exactly as often as it divides.
    """
    ring = p.ring
    lam = ring.gen(ring.lam)
    rng = np.random.default_rng(seed)
    points = [
        {ring.x(k): np.exp(1j * rng.uniform(-np.pi, np.pi)) for k in range(1, ring.d + 1)}
        for _ in range(trials)
    ]
    scale = sum(abs(complex(c)) for _, c in p.items())

    def vanishes_at(c: complex) -> bool:
        return all(abs(p.evaluate({ring.lam: c, **pt})) <= tol * scale for pt in points)

    candidates = [(1, lam - 1), (-1, lam + 1), (1j, lam**2 + 1)]
    trivial = []
    for root, factor in candidates:
        if not vanishes_at(root):
            continue
        mult = 0
        while p.degree(ring.lam) >= factor.degree(ring.lam):
            try:
                p = p.exquo(factor)
            except NotExactDivision:
                break
            mult += 1
        if mult:
            trivial.append((factor, mult))
    return p, trivial


# -- eigenphases and gradients ------------------------------------------------------------


def _principal(phases: np.ndarray) -> np.ndarray:
    """Map angles into (−π, π]."""
    phases = np.asarray(phases, dtype=float)
    return np.where(phases <= -np.pi, phases + 2 * np.pi, phases)


def eigenvalues(w: WalkDefinition, theta: Sequence[float]) -> np.ndarray:
    """Eigenvalues of ``M(θ)`` ordered by increasing principal phase."""
    d = np.asarray(w.directions)
    theta = np.asarray(theta, dtype=float)
    m = np.exp(1j * (d @ theta))[:, None] * w.coin_array()
    vals = np.linalg.eigvals(m)
    return vals[np.argsort(_principal(np.angle(vals)), kind="stable")]


def eigenphases(w: WalkDefinition, theta: Sequence[float]) -> np.ndarray:
    """Sorted principal arguments ``H_m(θ) ∈ (−π, π]`` of the eigenvalues of ``M(θ)``."""
    return np.sort(_principal(np.angle(eigenvalues(w, theta))))


def _is_trivial_value(cp: CharPoly, lam: complex, tol: float = 1e-7) -> bool:
    return any(abs(lam - r) < tol for r, _ in cp.trivial_roots())


def gradient_at(cp: CharPoly, lam: complex, theta: Sequence[float], tol: float = DEGENERATE_TOL) -> np.ndarray:
    """``∇H`` for the root ``lam`` of the nontrivial factor at ``θ``.

    Raises
    ------
    DegenerateSampleError
        If ``|p_λ| < tol`` or the result has an imaginary part above ``tol``.
    """
    ring = cp.ring
    p_lam, p_x = cp.derivatives
    xs = np.exp(1j * np.asarray(theta, dtype=float))
    point = {ring.lam: lam, **{ring.x(k + 1): xs[k] for k in range(cp.d)}}
    dl = p_lam.evaluate(point)
    if abs(dl) < tol:
        raise DegenerateSampleError(f"|p_lambda| = {abs(dl):.3g} below {tol:g} at theta={list(theta)}")
    vals = np.array([-pj.evaluate(point) * xs[k] / (lam * dl) for k, pj in enumerate(p_x)])
    if np.max(np.abs(vals.imag)) > tol:
        raise DegenerateSampleError(
            f"gradient has imaginary part {np.max(np.abs(vals.imag)):.3g} at theta={list(theta)}"
        )
    return vals.real


def grad_H(w: WalkDefinition, theta: Sequence[float], m: int, cp: CharPoly | None = None) -> np.ndarray:
    """``∇H_m(θ)`` for the ``m``-th eigenvalue in phase order.

    Eigenvalues of the trivial factors are constant, so their gradient is zero.
    """
    cp = cp or char_poly(w)
    lam = eigenvalues(w, theta)[m]
    if _is_trivial_value(cp, lam):
        nontrivial_val = cp.p.evaluate(
            {cp.ring.lam: lam, **{cp.ring.x(k + 1): np.exp(1j * theta[k]) for k in range(cp.d)}}
        )
        if abs(nontrivial_val) > DEGENERATE_TOL:
            return np.zeros(cp.d)
    return gradient_at(cp, lam, theta)


# -- closed forms ---------------------------------------------------------------------------


def quadratic_grad(a: float, grad_a: np.ndarray, upper: bool = True) -> np.ndarray:
    """``∇H`` for a root of ``λ² + aλ + 1`` with real ``|a| < 2``.

    This is the reduced form of the symmetric-quartic formula when the two
    quadratic factors coincide.  ``upper`` selects the root with ``Im λ > 0``.
    """
    if abs(a) >= 2:
        raise DegenerateSampleError(f"|a| = {abs(a):.6g} >= 2: roots leave the unit circle")
    g = np.asarray(grad_a, dtype=float) / np.sqrt(4 - a * a)
    return g if upper else -g


def symmetric_quartic_grad(
    x: float,
    y: float,
    grad_x: np.ndarray,
    grad_y: np.ndarray,
    sign: int = 1,
    upper: bool = True,
    tol: float = DEGENERATE_TOL,
) -> np.ndarray:
    """Closed-form ``∇H`` for ``λ⁴ + xλ³ + yλ² + xλ + 1 = (λ² + aλ + 1)(λ² + bλ + 1)``.

    ``a = (x + sign·√(x² − 4y + 8)) / 2`` and
    ``∇H = (a∇x − ∇y) / ((2a − x)√(4 − a²))`` for the root of ``λ² + aλ + 1``
    with ``Im λ > 0``; the conjugate root (``upper=False``) has the opposite
    gradient.

    Raises
    ------
    DegenerateSampleError
        When ``a`` is not real, ``|a| ≥ 2`` (roots off the unit circle) or
        ``2a = x`` (the two quadratic factors collide).
    """
    disc = x * x - 4 * y + 8
    if disc < 0:
        raise DegenerateSampleError("x^2 - 4y + 8 < 0: the quadratic factors are not real")
    root = np.sqrt(disc)
    a, b = _quadratic_pair(x, y, sign * root)
    if abs(a) >= 2:
        raise DegenerateSampleError(f"|a| = {abs(a):.6g} >= 2: evanescent branch")
    if root < tol:
        raise DegenerateSampleError("2a = x: the quadratic factors collide")
    g = (a * np.asarray(grad_x, dtype=float) - np.asarray(grad_y, dtype=float)) / (
        sign * root * np.sqrt((2 - a) * (2 + a))
    )
    return g if upper else -g


def _quadratic_pair(x: float, y: float, signed_root: float) -> tuple[float, float]:
    """Roots ``a = (x + signed_root)/2`` and ``b = x − a`` of ``t² − xt + (y − 2)``, cancellation-free."""
    if signed_root * x >= 0:
        a = (x + signed_root) / 2
        b = (y - 2) / a if a else x - a
    else:
        b = (x - signed_root) / 2
        a = (y - 2) / b if b else x - b
    return a, b


@dataclass(frozen=True)
class PalindromicForm:
    """``p(rμ) ∝ μ^N + c_1 μ^{N−1} + ... + 1`` with real palindromic coefficients, ``N ∈ {2, 4}``."""

    rotation: complex
    degree: int


def palindromic_form(cp: CharPoly, seed: int = 1, tol: float = 1e-9) -> PalindromicForm | None:
    """Find a rotation ``λ = rμ`` (``r ∈ {1, i}``) making the nontrivial factor real-palindromic."""
    ring = cp.ring
    deg = cp.p.degree(ring.lam)
    if deg not in (2, 4):
        return None
    coeffs = cp.p.coefficients_in(ring.lam)
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(-np.pi, np.pi, size=(4, cp.d))
    for r in (1, 1j):
        ok = True
        for th in thetas:
            xs = {ring.x(k + 1): np.exp(1j * th[k]) for k in range(cp.d)}
            c = [coeffs[k].evaluate(xs) * r**k if k in coeffs else 0 for k in range(deg + 1)]
            c = np.array(c) / c[deg]
            if np.max(np.abs(c.imag)) > tol or np.max(np.abs(c - c[::-1])) > tol:
                ok = False
                break
        if ok:
            return PalindromicForm(r, deg)
    return None


def _ratio_and_gradient(num: MultiPoly, den: MultiPoly, scale: complex, theta, ring: PolyRing, d: int):
    xs = np.exp(1j * np.asarray(theta, dtype=float))
    pt = {ring.x(k + 1): xs[k] for k in range(d)}
    u, v = num.evaluate(pt), den.evaluate(pt)
    grad = []
    for k in range(d):
        xk = ring.x(k + 1)
        du = 1j * xs[k] * num.diff(xk).evaluate(pt)
        dv = 1j * xs[k] * den.diff(xk).evaluate(pt)
        grad.append((du * v - u * dv) / (v * v))
    return (scale * u / v).real, (scale * np.array(grad)).real


def closed_form_gradients(cp: CharPoly, theta: Sequence[float]) -> list[tuple[complex, np.ndarray]]:
    """All nontrivial ``(λ, ∇H)`` pairs from the quadratic or symmetric-quartic formula.

    Raises
    ------
    ValueError
        If the nontrivial factor has no real palindromic form.
    DegenerateSampleError
        At samples where the closed form is singular.
    """
    form = palindromic_form(cp)
    if form is None:
        raise ValueError("nontrivial factor is not a (rotated) symmetric quadratic or quartic")
    ring = cp.ring
    coeffs = cp.p.coefficients_in(ring.lam)
    r, deg = form.rotation, form.degree
    top = coeffs[deg]
    zero = ring.zero
    out = []

    def roots_of(a: float) -> list[complex]:
        s = np.sqrt(complex(4 - a * a))
        return [(-a + 1j * s) / 2, (-a - 1j * s) / 2]

    if deg == 2:
        a, grad_a = _ratio_and_gradient(coeffs.get(1, zero), top, r ** (1 - 2), theta, ring, cp.d)
        for mu, upper in zip(roots_of(a), (True, False)):
            out.append((r * mu, quadratic_grad(a, grad_a, upper)))
        return out
    x, gx = _ratio_and_gradient(coeffs.get(3, zero), top, r ** (3 - 4), theta, ring, cp.d)
    y, gy = _ratio_and_gradient(coeffs.get(2, zero), top, r ** (2 - 4), theta, ring, cp.d)
    disc = np.sqrt(max(x * x - 4 * y + 8, 0.0))
    for sign in (1, -1):
        a = (x + sign * disc) / 2
        for mu, upper in zip(roots_of(a), (True, False)):
            out.append((r * mu, symmetric_quartic_grad(x, y, gx, gy, sign, upper)))
    return out


def quartic_sign_choice(cp: CharPoly, theta: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Which root ``a_± = (x ± √(x² − 4y + 8))/2`` each eigenvalue belongs to (``+1`` or ``−1``).

    Only defined for symmetric quartics: with ``λ = rμ`` each unit-modulus
    ``μ`` satisfies ``μ² + aμ + 1 = 0`` for ``a = −2 Re μ``, and ``a_+ + a_− = x``.

    Parameters
    ----------
    theta : ndarray, shape (N, d)
    lam : ndarray, shape (N,)
    """
    form = palindromic_form(cp)
    if form is None or form.degree != 4:
        raise ValueError("sign choices exist only for symmetric quartic characteristic polynomials")
    ring = cp.ring
    coeffs = cp.p.coefficients_in(ring.lam)
    theta = np.asarray(theta, dtype=float)
    pt = {ring.x(k + 1): np.exp(1j * theta[:, k]) for k in range(cp.d)}
    zero = ring.zero
    x = (coeffs.get(3, zero).evaluate_array(pt) / coeffs[4].evaluate_array(pt) / form.rotation).real
    a = -2 * (np.asarray(lam) / form.rotation).real
    return np.where(a - x / 2 >= 0, 1, -1)


# -- parametric locus -------------------------------------------------------------------------


@dataclass
class ParametricLocus:
    """Samples ``X = ∇H_m(θ)`` over a uniform θ grid.

    ``hessian_sign`` is the sign of ``det ∂²H_m/∂θ²`` estimated by central
    differences of the gradient between neighbouring grid points (0 where a
    neighbour was dropped).
    """

    theta: np.ndarray
    branch: np.ndarray
    X: np.ndarray
    hessian_sign: np.ndarray
    resolution: int
    dropped: dict[str, int] = field(default_factory=dict)
    eigenvalue: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.branch)

    def branch_points(self, m: int) -> np.ndarray:
        return self.X[self.branch == m]

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta1", "theta2", "branch", "X1", "X2", "hessian_sign"])
            for th, b, x, h in zip(self.theta, self.branch, self.X, self.hessian_sign):
                writer.writerow([repr(float(th[0])), repr(float(th[1])), int(b), repr(float(x[0])), repr(float(x[1])), int(h)])

    @classmethod
    def read_csv(cls, path: str | Path) -> ParametricLocus:
        """Read a file written by :meth:`to_csv`.

        The grid resolution is recovered from the θ spacing; dropped-sample
        counts and eigenvalues are not stored and come back empty.
        """
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["theta1", "theta2", "branch", "X1", "X2", "hessian_sign"]:
                raise ValueError(f"unexpected locus CSV header {header!r}")
            rows = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, 6)
        theta = rows[:, :2]
        steps = np.diff(np.unique(theta))
        steps = steps[steps > 1e-12]
        resolution = int(round(2 * np.pi / steps.min())) if len(steps) else 1
        return cls(
            theta=theta,
            branch=rows[:, 2].astype(int),
            X=rows[:, 3:5],
            hessian_sign=rows[:, 5].astype(int),
            resolution=resolution,
        )

    def subset(self, mask: np.ndarray) -> ParametricLocus:
        """The samples selected by a boolean mask."""
        return ParametricLocus(
            theta=self.theta[mask],
            branch=self.branch[mask],
            X=self.X[mask],
            hessian_sign=self.hessian_sign[mask],
            resolution=self.resolution,
            dropped=dict(self.dropped),
            eigenvalue=None if self.eigenvalue is None else self.eigenvalue[mask],
        )


def _halve_lambda(p: MultiPoly) -> MultiPoly:
    """Substitute ``λ² → Λ`` (``p`` must be even in λ); Λ reuses the λ slot."""
    ring = p.ring
    out = {}
    for exps, c in p.terms().items():
        out[(exps[0] // 2,) + exps[1:]] = c
    return ring.from_terms(out)


def _grid_eigenvalues(w: WalkDefinition, thetas: np.ndarray, chunk: int = 32768) -> np.ndarray:
    flat = thetas.reshape(-1, w.d)
    coin = w.coin_array()
    dirs = np.asarray(w.directions)
    out = np.empty((flat.shape[0], w.n), dtype=complex)
    for start in range(0, flat.shape[0], chunk):
        th = flat[start : start + chunk]
        m = np.exp(1j * (th @ dirs.T))[..., :, None] * coin
        out[start : start + chunk] = np.linalg.eigvals(m)
    return out.reshape(thetas.shape[:-1] + (w.n,))


def _remove_trivial(vals: np.ndarray, roots: list[tuple[complex, int]]) -> np.ndarray:
    """Drop, per sample, the eigenvalues closest to each trivial root (with multiplicity)."""
    work = vals.copy()
    removed = np.zeros(vals.shape, dtype=bool)
    for r, mult in roots:
        for _ in range(mult):
            dist = np.where(removed, np.inf, np.abs(work - r))
            idx = np.argmin(dist, axis=-1)
            np.put_along_axis(removed, idx[..., None], True, axis=-1)
    k = vals.shape[-1] - sum(mult for _, mult in roots)
    return vals[~removed].reshape(vals.shape[:-1] + (k,))


def _match_to(prev: np.ndarray, cur: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Reorder ``cur`` (rows, k) to follow ``prev`` (rows, k) by minimal total distance."""
    cand = cur[:, perms]  # (rows, P, k)
    cost = np.abs(cand - prev[:, None, :]).sum(axis=-1)
    best = np.argmin(cost, axis=1)
    return cand[np.arange(cur.shape[0]), best]


def _gradients_on_grid(cp: CharPoly, lam: np.ndarray, xs: list[np.ndarray], use_lambda_squared: bool):
    ring = cp.ring
    if use_lambda_squared:
        q = _halve_lambda(cp.p)
        big = lam * lam
        pt = {ring.lam: big, **{ring.x(k + 1): xs[k] for k in range(cp.d)}}
        q_lam = q.diff(ring.lam).evaluate_array(pt)
        denom = big * q_lam
        grads = [-0.5 * q.diff(ring.x(k + 1)).evaluate_array(pt) * xs[k] / denom for k in range(cp.d)]
        p_lam_abs = np.abs(2 * lam * q_lam)
    else:
        p_lam, p_x = cp.derivatives
        pt = {ring.lam: lam, **{ring.x(k + 1): xs[k] for k in range(cp.d)}}
        dl = p_lam.evaluate_array(pt)
        denom = lam * dl
        grads = [-p_x[k].evaluate_array(pt) * xs[k] / denom for k in range(cp.d)]
        p_lam_abs = np.abs(dl)
    return np.stack(grads, axis=-1), p_lam_abs


def trace_locus(
    w: WalkDefinition,
    resolution: int = DEFAULT_RESOLUTION,
    cp: CharPoly | None = None,
    use_lambda_squared: bool | None = None,
) -> ParametricLocus:
    """Sample ``∇H_m`` for every nontrivial branch on a ``resolution^d`` grid over ``[−π, π)^d``.

    Branches are labelled by nearest-eigenvalue continuity: first down the
    first grid column, then across each row.  Samples are dropped when
    ``|p_λ| < 1e-8``, when the gradient is not real to 1e-8, or when the
    eigenvalue lies within phase ``1e-6`` of another eigenvalue.

    For characteristic polynomials even in λ the gradient is computed through
    ``Λ = λ²`` with the chain-rule factor 1/2 (``use_lambda_squared``
    defaults to that case).
    """
    if w.d != 2:
        raise ValueError("trace_locus samples two-dimensional walks")
    cp = cp or char_poly(w)
    if use_lambda_squared is None:
        use_lambda_squared = cp.even_in_lambda()
    axis = -np.pi + 2 * np.pi * np.arange(resolution) / resolution
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    thetas = np.stack([t1, t2], axis=-1)
    allvals = _grid_eigenvalues(w, thetas)
    vals = _remove_trivial(allvals, cp.trivial_roots())
    k = vals.shape[-1]

    # continuity labelling
    if k <= 6:
        perms = np.array(list(itertools.permutations(range(k))))
    else:  # pragma: no cover - larger coins keep phase order
        perms = np.arange(k)[None, :]
    order = np.argsort(_principal(np.angle(vals)), axis=-1)
    vals = np.take_along_axis(vals, order, axis=-1)
    for i in range(1, resolution):
        vals[i, 0] = _match_to(vals[i - 1, 0][None], vals[i, 0][None], perms)[0]
    for j in range(1, resolution):
        vals[:, j] = _match_to(vals[:, j - 1], vals[:, j], perms)

    xs = [np.exp(1j * t1)[..., None], np.exp(1j * t2)[..., None]]
    with np.errstate(divide="ignore", invalid="ignore"):
        grads, p_lam_abs = _gradients_on_grid(cp, vals, xs, use_lambda_squared)

    # phase gap to every other eigenvalue, trivial ones included
    ph_all = np.angle(allvals)
    ph = np.angle(vals)
    diff = np.abs(np.angle(np.exp(1j * (ph[..., :, None] - ph_all[..., None, :]))))
    # each nontrivial value matches itself once in the full spectrum
    gap = np.sort(diff, axis=-1)[..., 1]

    degenerate = p_lam_abs < DEGENERATE_TOL
    complex_grad = np.max(np.abs(grads.imag), axis=-1) > DEGENERATE_TOL
    collide = gap < COLLISION_GAP
    keep = ~(degenerate | complex_grad | collide)
    X = np.where(keep[..., None], grads.real, np.nan)

    hsign = _hessian_signs(vals, X, 2 * np.pi / resolution)

    idx = np.argwhere(keep)
    theta_out = thetas[idx[:, 0], idx[:, 1]]
    return ParametricLocus(
        theta=theta_out,
        branch=idx[:, 2].astype(int),
        X=X[idx[:, 0], idx[:, 1], idx[:, 2]],
        hessian_sign=hsign[idx[:, 0], idx[:, 1], idx[:, 2]],
        resolution=resolution,
        eigenvalue=vals[idx[:, 0], idx[:, 1], idx[:, 2]],
        dropped={
            "degenerate": int(degenerate.sum()),
            "complex": int((complex_grad & ~degenerate).sum()),
            "collision": int((collide & ~degenerate & ~complex_grad).sum()),
        },
    )


def _hessian_signs(vals: np.ndarray, X: np.ndarray, h: float) -> np.ndarray:
    """Sign of ``det ∂X/∂θ`` from central differences on the periodic grid.

    The neighbour value is the gradient of the neighbour's eigenvalue closest
    to the sample's own eigenvalue, which keeps each difference on one branch
    independently of the global labelling.
    """
    k = vals.shape[-1]

    def neighbour(axis: int, shift: int) -> np.ndarray:
        nv = np.roll(vals, -shift, axis=axis)
        nX = np.roll(X, -shift, axis=axis)
        dist = np.abs(nv[..., None, :] - vals[..., :, None])  # (..., k_self, k_nb)
        pick = np.argmin(dist, axis=-1)
        return np.take_along_axis(nX, pick[..., None].repeat(2, axis=-1), axis=-2)

    jac = np.empty(vals.shape + (2, 2))
    for ax in range(2):
        fwd = neighbour(ax, 1)
        bwd = neighbour(ax, -1)
        jac[..., :, ax] = (fwd - bwd) / (2 * h)
    jac = 0.5 * (jac + np.swapaxes(jac, -1, -2))
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    sign = np.sign(det)
    return np.where(np.isfinite(det), sign, 0).astype(int)


def numeric_hessian(w: WalkDefinition, theta: Sequence[float], m: int, h: float = 1e-4, cp: CharPoly | None = None) -> np.ndarray:
    """``∂²H_m/∂θ_j∂θ_k`` by central differences of :func:`gradient_at`, following the branch."""
    cp = cp or char_poly(w)
    theta = np.asarray(theta, dtype=float)
    lam0 = eigenvalues(w, theta)[m]
    out = np.empty((w.d, w.d))
    for k in range(w.d):
        cols = []
        for s in (1, -1):
            th = theta.copy()
            th[k] += s * h
            vals = eigenvalues(w, th)
            lam = vals[np.argmin(np.abs(vals - lam0))]
            cols.append(gradient_at(cp, lam, th))
        out[:, k] = (cols[0] - cols[1]) / (2 * h)
    return 0.5 * (out + out.T)
