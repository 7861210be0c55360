"""The degenerate-critical-point system in ``(λ, x_1, x_2, X_1, X_2)``.

A stationary point of ``H_m(θ) − X·θ`` satisfies ``∇H_m = X``; with
``λ_j = −i x_j p_j / p_λ`` this becomes the polynomial condition
``p_j x_j + λ p_λ X_j = 0``.  Degeneracy asks in addition that the
Hessian of ``H_m`` be singular, i.e. ``det[λ_j λ_k − λ_{jk} λ] = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..poly.budget import Budget, BudgetExceeded
from ..poly.factors import primitive_normalize
from ..poly.multipoly import MultiPoly, Variable
from ..spectral import CharPoly

FULL = "full"
NAIVE = "naive"
MODES = (FULL, NAIVE)
FULL_MODE_TERM_LIMIT = 40
FULL_MODE_HESSIAN_LIMIT = 200


def stationary_equations(cp: CharPoly, d: int = 2) -> list[MultiPoly]:
    """``[p_j x_j + λ p_λ X_j for j = 1..d]``."""
    p = cp.p
    if p.is_zero():
        raise ValueError("characteristic polynomial is zero")
    ring = p.ring
    lam = ring.gen(ring.lam)
    p_lam = p.diff(ring.lam)
    out = []
    for j in range(1, d + 1):
        xj = ring.gen(ring.x(j))
        out.append(p.diff(ring.x(j)) * xj + lam * p_lam * ring.gen(ring.X(j)))
    return out


def exp_hessian(cp: CharPoly, d: int = 2, budget: Budget | None = None, normalize: bool = True) -> MultiPoly:
    """Numerator of ``det[λ_j λ_k − λ_{jk} λ]`` after multiplying by ``p_λ⁶``.

    Implicit differentiation of ``p(λ(θ), e^{iθ}) = 0`` gives
    ``λ_j = L_j / p_λ`` with ``L_j = −i x_j p_j`` and

        p_λ³ λ_{jk} = −[p_λλ L_j L_k + i p_λ (x_k p_λk L_j + x_j p_λj L_k)
                        − p_λ² x_j x_k p_jk − δ_jk p_λ² x_j p_j],

    so ``p_λ³ (λ_j λ_k − λ_{jk} λ) = p_λ L_j L_k − λ · p_λ³ λ_{jk}`` is a
    polynomial ``N_jk`` and the determinant numerator is
    ``N_11 N_22 − N_12²``.  With ``normalize`` (the default) the result is
    monomial-content-stripped and scaled to coprime integer coefficients.

    Raises
    ------
    BudgetExceeded
        If an intermediate exceeds ``budget.max_terms``.
    """
    if d != 2:
        raise ValueError("the explicit Hessian determinant is implemented for d = 2")
    budget = budget or Budget()
    p = cp.p
    ring = p.ring
    lam = ring.gen(ring.lam)
    L = ring.lam
    p_l = p.diff(L)
    p_ll = p_l.diff(L)
    xs = [ring.gen(ring.x(j)) for j in (1, 2)]
    pj = [p.diff(ring.x(j)) for j in (1, 2)]
    plj = [p_l.diff(ring.x(j)) for j in (1, 2)]

    def n_entry(j: int, k: int) -> MultiPoly:
        xjxk = xs[j] * xs[k]
        pjk = pj[j].diff(ring.x(k + 1))
        # every L_j L_k product is -x_j x_k p_j p_k, and i p_λ x_k p_λk L_j = p_λ x_j x_k p_λk p_j
        inner = (
            -p_ll * xjxk * pj[j] * pj[k]
            + p_l * xjxk * (plj[k] * pj[j] + plj[j] * pj[k])
            - p_l * p_l * xjxk * pjk
        )
        if j == k:
            inner = inner - p_l * p_l * xs[j] * pj[j]
        out = -p_l * xjxk * pj[j] * pj[k] + lam * inner
        budget.check_terms(len(out), "Hessian entry")
        return out

    n11, n22, n12 = n_entry(0, 0), n_entry(1, 1), n_entry(0, 1)
    det = n11 * n22 - n12 * n12
    budget.check_terms(len(det), "exponential Hessian determinant")
    if det.is_zero() or not normalize:
        return det
    stripped, _ = det.strip_monomial_content()
    return primitive_normalize(stripped)


@dataclass
class PolySystem:
    """``[p, S_1, S_2, last]`` with ``last`` the Hessian numerator (full) or ``p_λ`` (naive).

    ``order`` lists the variables in elimination order.  ``bases`` holds the
    base index per stage: stage 1 pairs every polynomial with
    ``polynomials[bases[0]]``, stage 2 with the stage-1 descendant of
    ``polynomials[bases[1]]``.  The default base is ``p`` itself; taking
    ``p_λ`` instead loses ``X`` altogether, because each stationary
    equation reduces to ``p_j x_j`` wherever ``p_λ = 0``.
    """

    polynomials: list[MultiPoly]
    mode: str
    order: list[Variable]
    bases: list[int] = field(default_factory=lambda: [0, 1])
    cp: CharPoly | None = None

    @property
    def ring(self):
        return self.polynomials[0].ring


def build_system(cp: CharPoly, mode: str = NAIVE, budget: Budget | None = None) -> PolySystem:
    """Assemble the elimination system; ``mode`` is ``"full"`` or ``"naive"``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if cp.d != 2:
        raise ValueError("systems are built for d = 2")
    p = cp.p
    ring = p.ring
    stationary = stationary_equations(cp, 2)
    last = exp_hessian(cp, 2, budget) if mode == FULL else p.diff(ring.lam)
    return PolySystem(
        [p, *stationary, last],
        mode,
        [ring.x(1), ring.x(2), ring.lam],
        cp=cp,
    )


def preferred_mode(cp: CharPoly) -> str:
    """Full mode only for small systems, naive mode otherwise.

    The characteristic polynomial must have at most 40 terms and the
    exponential Hessian numerator at most 200.  Every zoo walk passes the
    first test; the second singles out the four-state Grover walk (124 terms
    against 265 or more for the others).
    """
    if len(cp.p) > FULL_MODE_TERM_LIMIT:
        return NAIVE
    try:
        hessian = exp_hessian(cp, 2, Budget(max_terms=50 * FULL_MODE_HESSIAN_LIMIT))
    except BudgetExceeded:
        return NAIVE
    return FULL if len(hessian) <= FULL_MODE_HESSIAN_LIMIT else NAIVE


__all__ = [
    "BudgetExceeded",
    "FULL",
    "NAIVE",
    "PolySystem",
    "build_system",
    "exp_hessian",
    "preferred_mode",
    "stationary_equations",
]
