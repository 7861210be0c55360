"""Gröbner-basis elimination of the degenerate-critical-point system.

The stationary equations are first saturated by ``λ x_1 x_2 p_λ``: points
with ``λ = 0`` or ``x_k = 0`` are irrelevant on the unit torus, and points
with ``p_λ = 0`` would otherwise leave ``X`` unconstrained (there every
stationary equation collapses to ``p_j x_j = 0``).  The closure of what
remains is then intersected with each factor of the last system polynomial.
The exponential Hessian numerator is always divisible by ``p_λ`` (modulo
``p_λ`` its determinant collapses to ``λ² p_λλ² x_1² x_2² (p_1² p_2² − (p_1 p_2)²) = 0``),
so it splits into a ``p_λ`` branch and a residual core branch.
"""

from __future__ import annotations

from ..poly.budget import Budget, BudgetExceeded
from ..poly.factors import strip_known_factors
from ..poly.groebner import BlockOrder, buchberger, elimination_polynomials
from ..poly.multipoly import AUX, MultiPoly
from .curves import BifurcationCurve, irreducible_factors
from .system import PolySystem

DEFAULT_GROEBNER_BUDGET = Budget(max_terms=20_000, max_degree=64, max_steps=10_000, seconds=120)


class GroebnerBudgetExceeded(BudgetExceeded):
    """The Gröbner route ran out of budget; the resultant chain is the fallback."""


def saturated_stationary_ideal(sys: PolySystem, budget: Budget) -> list[MultiPoly]:
    """Generators of ``⟨p, S_1, S_2⟩ : (λ x_1 x_2 p_λ)^∞`` in the system ring."""
    ring = sys.ring
    aux = ring.with_aux()
    p = sys.polynomials[0]
    p_lam = p.diff(ring.lam)
    guard = ring.gen(ring.lam) * p_lam
    for k in range(1, ring.d + 1):
        guard = guard * ring.gen(ring.x(k))
    gens = [aux.convert(q) for q in sys.polynomials[:3]]
    gens.append(aux.gen(AUX) * aux.convert(guard) - 1)
    order = BlockOrder(aux, [[AUX], list(ring.variables)])
    basis = buchberger(gens, budget, order)
    return [ring.convert(g) for g in basis if not g.has(AUX)]


def hessian_branches(sys: PolySystem) -> dict[str, MultiPoly]:
    """Split the last system polynomial into its ``p_λ`` and core factors."""
    ring = sys.ring
    p = sys.polynomials[0]
    p_lam, _ = p.diff(ring.lam).strip_monomial_content()
    last = sys.polynomials[3]
    monomials = [ring.gen(ring.lam)] + [ring.gen(ring.x(k)) for k in range(1, ring.d + 1)]
    core, stripped = strip_known_factors(last, monomials + [p_lam])
    branches = {}
    if any(f == p_lam for f, _ in stripped):
        branches["p_lambda"] = p_lam
    if not core.is_constant():
        branches["core"] = core
    return branches


def groebner_eliminate(sys: PolySystem, budget: Budget | None = None) -> list[BifurcationCurve]:
    """Irreducible factors of the X-only elements of the elimination ideal.

    Each branch uses a block order with ``(λ, x_1, x_2)`` above ``(X_1, X_2)``
    so that the basis elements free of the first block generate the
    elimination ideal.  The same budget (restarted) applies to the
    saturation and to each branch.

    Raises
    ------
    GroebnerBudgetExceeded
        If any step runs out of budget; use :func:`eliminate_chain` instead.
    """
    budget = budget or DEFAULT_GROEBNER_BUDGET
    ring = sys.ring
    try:
        stationary = saturated_stationary_ideal(sys, budget.start())
    except BudgetExceeded as exc:
        raise GroebnerBudgetExceeded(
            exc.reason, f"saturation of the stationary ideal: {exc}; use eliminate_chain", exc.partial
        ) from exc
    order = BlockOrder(ring, [[ring.lam, *(ring.x(k) for k in range(1, ring.d + 1))], list(ring.spatial_variables)])
    curves: list[BifurcationCurve] = []
    seen: dict[MultiPoly, BifurcationCurve] = {}
    for name, factor in hessian_branches(sys).items():
        try:
            basis = buchberger(stationary + [factor], budget.start(), order)
        except BudgetExceeded as exc:
            raise GroebnerBudgetExceeded(
                exc.reason, f"{name} branch: {exc}; use eliminate_chain", exc.partial
            ) from exc
        eliminants = elimination_polynomials(basis, ring.spatial_variables)
        for k, g in enumerate(eliminants, 1):
            for f, _ in irreducible_factors(g):
                path = ("groebner", name, f"G{k}")
                if f in seen:
                    seen[f].other_paths.append(path)
                else:
                    seen[f] = BifurcationCurve(f, path)
                    curves.append(seen[f])
    return curves


__all__ = [
    "DEFAULT_GROEBNER_BUDGET",
    "GroebnerBudgetExceeded",
    "groebner_eliminate",
    "hessian_branches",
    "saturated_stationary_ideal",
]
