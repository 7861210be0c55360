"""Resultant elimination chain recorded as a factor tree.

Stage 1 cancels ``x_1`` by taking the resultant of every polynomial with a
base polynomial, stage 2 cancels ``x_2`` in the same way, and stage 3 removes
``λ``.  After each resultant the anticipated factors (powers of ``λ``,
``λ ± 1``, ``λ² + 1``, ``x_k`` and ``X_k``) are divided out and repeated
factors are reduced to one copy.  Stripped ``λ`` factors pin ``λ`` to a
fourth root of unity; stage 3 substitutes each such value into the
surviving polynomials in ``(λ, X)``.  Polynomials in ``λ`` alone are used
only if they have roots on the unit circle.  Whatever is left in ``X`` alone
is factored into irreducible candidate curves.

Nodes never disappear: a resultant that exceeds its budget, a pair that
cannot be formed, or a branch that turns out to be irrelevant is kept with
a status and a note, so the tree documents every decision.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..poly.budget import Budget, BudgetExceeded
from ..poly.factors import default_candidates, product, reduce_multiplicity, strip_known_factors
from ..poly.gaussian import GaussianRational
from ..poly.multipoly import MultiPoly, PolyRing, Variable
from ..poly.resultant import sylvester_resultant
from .curves import BifurcationCurve, irreducible_factors
from .system import PolySystem

RESULTANT_TERM_CAP = 200_000
RESULTANT_DEGREE_CAP = 512
NODE_SECONDS = 120.0
# gcd-based square-free reduction is attempted only on polynomials this small
SQUARE_FREE_TERM_LIMIT = 100
SQUARE_FREE_SECONDS = 30.0
UNIT_CIRCLE_TOL = 1e-9

OK = "ok"
FAILED = "failed"
SKIPPED = "skipped"
EXHAUSTED = "exhausted"
IGNORED = "ignored"

log = logging.getLogger(__name__)

_ONE = GaussianRational(1)
_I = GaussianRational(0, 1)
# (candidate factor as text, roots it pins λ to); bare λ is excluded since |λ| = 1
_LAMBDA_ROOT_FACTORS = {
    "lambda - 1": (_ONE,),
    "lambda + 1": (-_ONE,),
    "lambda^2 + 1": (_I, -_I),
}
_ROOT_ORDER = (_ONE, -_ONE, _I, -_I)


_ROOT_NAMES = {_ONE: "1", -_ONE: "-1", _I: "i", -_I: "-i"}


def format_root(c: GaussianRational) -> str:
    return f"lambda={_ROOT_NAMES.get(c, str(c))}"


@dataclass
class FactorNode:
    """One polynomial in the factor tree.

    ``raw`` is the polynomial as produced (resultant, substitution or
    factor), ``cofactor`` what is left after dividing out ``stripped``, so
    that ``cofactor * prod(f**m) == raw`` exactly, and ``polynomial`` the
    cofactor with repeated factors reduced (same zero set).  Nodes that could
    not be computed keep ``raw`` and ``polynomial`` as ``None``.
    """

    id: str
    stage: int
    operation: str
    parents: tuple[str, ...] = ()
    raw: MultiPoly | None = None
    cofactor: MultiPoly | None = None
    stripped: list[tuple[MultiPoly, int]] = field(default_factory=list)
    polynomial: MultiPoly | None = None
    multiplicity: int = 1
    status: str = OK
    note: str = ""
    substitution: GaussianRational | None = None

    @property
    def usable(self) -> bool:
        return self.status == OK and self.polynomial is not None

    def reconstructs(self) -> bool:
        """The strip-factor invariant ``cofactor * prod(stripped) == raw``."""
        if self.raw is None:
            return True
        return self.cofactor * product(self.raw.ring, self.stripped) == self.raw

    def lambda_roots(self) -> list[GaussianRational]:
        """Unit-modulus ``λ`` values forced by the stripped factors."""
        out = []
        for f, _ in self.stripped:
            out.extend(_LAMBDA_ROOT_FACTORS.get(str(f), ()))
        return out

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "stage": self.stage,
            "operation": self.operation,
            "parents": list(self.parents),
            "status": self.status,
            "note": self.note,
            "stripped": [[str(f), m] for f, m in self.stripped],
            "multiplicity": self.multiplicity,
            "terms": None if self.polynomial is None else len(self.polynomial),
            "polynomial": None if self.polynomial is None or len(self.polynomial) > 50 else str(self.polynomial),
            "substitution": None if self.substitution is None else str(self.substitution),
        }


@dataclass
class FactorTree:
    """Nodes of an elimination run keyed by id, in creation order."""

    nodes: dict[str, FactorNode] = field(default_factory=dict)

    def add(self, node: FactorNode) -> FactorNode:
        if node.id in self.nodes:
            raise ValueError(f"duplicate node id {node.id}")
        self.nodes[node.id] = node
        return node

    def __getitem__(self, key: str) -> FactorNode:
        return self.nodes[key]

    def __iter__(self):
        return iter(self.nodes.values())

    def stage(self, k: int) -> list[FactorNode]:
        return [n for n in self if n.stage == k]

    def path(self, node_id: str) -> tuple[str, ...]:
        """Ancestors of a node (itself included), ordered by stage then id."""
        seen: dict[str, FactorNode] = {}
        todo = [node_id]
        while todo:
            nid = todo.pop()
            if nid in seen:
                continue
            node = self.nodes[nid]
            seen[nid] = node
            todo.extend(node.parents)
        ordered = sorted(seen.values(), key=lambda n: (n.stage, list(self.nodes).index(n.id)))
        return tuple(n.id for n in ordered)

    def leaves(self, substitution: GaussianRational | None | str = "any") -> list[FactorNode]:
        """Usable irreducible factors in ``X`` alone.

        ``substitution`` filters by the ``λ`` value of the branch: pass a
        root, ``None`` for branches without a substitution, or ``"any"``.
        """
        out = [n for n in self if n.operation == "factor" and n.usable]
        if isinstance(substitution, str):
            return out
        return [n for n in out if n.substitution == substitution]

    def failures(self) -> list[FactorNode]:
        return [n for n in self if n.status == FAILED]

    def check_reconstruction(self) -> bool:
        return all(n.reconstructs() for n in self)

    def curves(self) -> list[BifurcationCurve]:
        """Distinct leaf polynomials as curves, first provenance kept as primary."""
        by_poly: dict[MultiPoly, BifurcationCurve] = {}
        for leaf in self.leaves():
            key = leaf.polynomial.monic()
            path = self.path(leaf.id)
            if key in by_poly:
                by_poly[key].other_paths.append(path)
            else:
                by_poly[key] = BifurcationCurve(key, path)
        return list(by_poly.values())

    def to_json(self) -> list[dict]:
        return [n.to_json() for n in self]


class _Builder:
    def __init__(self, ring: PolyRing, budget: Budget, tree: FactorTree):
        self.ring = ring
        self.budget = budget
        self.tree = tree
        self.candidates = default_candidates(ring)

    def _node_budget(self) -> Budget:
        return self.budget.start()

    def finish(self, node: FactorNode, raw: MultiPoly, strip: bool = True) -> FactorNode:
        """Strip known factors and reduce multiplicity of ``raw`` into ``node``."""
        node.raw = raw
        if raw.is_zero():
            node.status, node.note = FAILED, "identically zero: the inputs share a factor"
            node.cofactor = raw
            return self.tree.add(node)
        cofactor, stripped = strip_known_factors(raw, self.candidates) if strip else (raw, [])
        node.cofactor, node.stripped = cofactor, stripped
        if cofactor.is_constant():
            node.status = EXHAUSTED
            node.note = "only known factors remain"
            node.polynomial = cofactor
            return self.tree.add(node)
        gcd_budget = None
        if len(cofactor) <= SQUARE_FREE_TERM_LIMIT:
            gcd_budget = Budget(self.budget.max_terms, self.budget.max_degree, seconds=SQUARE_FREE_SECONDS)
        reduced, exponent, method = reduce_multiplicity(cofactor, gcd_budget)
        node.polynomial, node.multiplicity = reduced, exponent
        if method not in ("none", ""):
            node.note = f"repeated factors reduced ({method})"
        return self.tree.add(node)

    def resultant(self, node_id: str, stage: int, f: FactorNode, g: FactorNode, v: Variable) -> FactorNode:
        """``Res(f, g; v)`` as a new node, or a carried/skipped/failed marker."""
        node = FactorNode(node_id, stage, f"resultant({v.name})", (f.id, g.id), substitution=f.substitution)
        fp, gp = f.polynomial, g.polynomial
        if not fp.has(v):
            node.operation = f"carry({v.name})"
            node.parents = (f.id,)
            node.note = f"{f.id} does not involve {v.name}; carried forward unchanged"
            node.raw = node.cofactor = node.polynomial = fp
            return self.tree.add(node)
        if not gp.has(v):
            node.status = SKIPPED
            node.note = f"base {g.id} does not involve {v.name}"
            return self.tree.add(node)
        budget = self._node_budget()
        start = time.monotonic()
        try:
            raw = sylvester_resultant(fp, gp, v, budget=budget)
            budget.check_terms(len(raw), "resultant")
        except BudgetExceeded as exc:
            node.status, node.note = FAILED, f"budget exceeded ({exc.reason}): {exc}"
            log.info("%s failed after %.1fs: %s", node_id, time.monotonic() - start, exc)
            return self.tree.add(node)
        log.info("%s: %d terms in %.1fs", node_id, len(raw), time.monotonic() - start)
        return self.finish(node, raw)

    def substitute(self, node_id: str, f: FactorNode, root: GaussianRational) -> FactorNode:
        node = FactorNode(node_id, 3, "substitute(lambda)", (f.id,), substitution=root)
        return self.finish(node, f.polynomial.substitute(self.ring.lam, root))

    def factor_leaves(self, parent: FactorNode) -> None:
        """Split an X-only node (plus any stripped X factors) into irreducible leaves."""
        pieces: list[MultiPoly] = []
        if parent.usable and not parent.polynomial.is_constant():
            pieces.extend(f for f, _ in irreducible_factors(parent.polynomial))
        pieces.extend(f for f, _ in parent.stripped if _is_spatial(f))
        for k, f in enumerate(pieces, 1):
            leaf = FactorNode(
                f"{parent.id}#{k}", parent.stage, "factor", (parent.id,), substitution=parent.substitution
            )
            leaf.raw = leaf.cofactor = leaf.polynomial = f
            self.tree.add(leaf)


def _is_spatial(p: MultiPoly) -> bool:
    spatial = set(p.ring.spatial_variables)
    return not p.is_constant() and all(v in spatial for v in p.variables_present())


def _has_lambda(p: MultiPoly) -> bool:
    return p.has(p.ring.lam)


def unit_circle_roots(p: MultiPoly, tol: float = UNIT_CIRCLE_TOL) -> np.ndarray:
    """Numeric roots of a polynomial in ``λ`` alone that lie on the unit circle."""
    coeffs = p.coefficients_in(p.ring.lam)
    top = max(coeffs)
    vec = [complex(coeffs[k].constant_coefficient()) if k in coeffs else 0.0 for k in range(top, -1, -1)]
    roots = np.roots(vec)
    return roots[np.abs(np.abs(roots) - 1) < tol]


def eliminate_chain(
    sys: PolySystem,
    budget: Budget | None = None,
    node_seconds: float | None = NODE_SECONDS,
) -> FactorTree:
    """Run the three-stage resultant chain on a ``d = 2`` system.

    Parameters
    ----------
    sys : PolySystem
        ``sys.order`` gives the stage-1 and stage-2 variables (then ``λ``);
        ``sys.bases`` the index of the base polynomial at stages 1 and 2.
    budget : Budget, optional
        Per-resultant caps.  Defaults to 200,000 terms and total degree 512.
    node_seconds : float or None
        Wall-clock cap per resultant, 120 s by default; overrides
        ``budget.seconds``.  ``None`` keeps ``budget.seconds``.

    Returns
    -------
    FactorTree
        Input nodes ``P1..P4``, stage-1 nodes ``A<j>``, stage-2 nodes
        ``B<j>`` (the index of the input they descend from), stage-3 nodes
        ``C<j>[lambda=c]`` or ``C<j>|B<k>``, and leaves ``<parent>#<k>``.
    """
    ring = sys.ring
    if ring.d != 2:
        raise ValueError("the elimination chain is implemented for d = 2")
    budget = budget or Budget(max_terms=RESULTANT_TERM_CAP, max_degree=RESULTANT_DEGREE_CAP)
    if node_seconds is not None:
        budget = Budget(budget.max_terms, budget.max_degree, budget.max_steps, node_seconds)
    tree = FactorTree()
    build = _Builder(ring, budget, tree)
    v1, v2 = sys.order[0], sys.order[1]

    inputs = []
    for j, p in enumerate(sys.polynomials, 1):
        node = FactorNode(f"P{j}", 0, "input", raw=p, cofactor=p, polynomial=p)
        inputs.append(tree.add(node))

    # stage 1: cancel v1 against the base input
    base = inputs[sys.bases[0]]
    stage1 = {}
    for j, node in enumerate(inputs, 1):
        if node is base:
            continue
        stage1[j] = build.resultant(f"A{j}", 1, node, base, v1)

    # stage 2: cancel v2 against the chosen stage-1 node
    preferred = sys.bases[1] + 1
    usable = [j for j, n in stage1.items() if n.usable and n.polynomial.has(v2)]
    if not usable:
        return tree
    base_j = preferred if preferred in usable else usable[0]
    base2 = stage1[base_j]
    stage2 = []
    for j, node in stage1.items():
        if j == base_j or not node.usable:
            continue
        stage2.append(build.resultant(f"B{j}", 2, node, base2, v2))

    # stage 3: pin or cancel λ
    roots: list[GaussianRational] = []
    for node in tree:
        if node.stage in (1, 2):
            roots.extend(node.lambda_roots())
    spatial_nodes = [n for n in stage2 if n.usable and any(v in ring.spatial_variables for v in n.polynomial.variables_present())]
    lambda_nodes = [n for n in stage2 if n.usable and not n.polynomial.is_constant() and n not in spatial_nodes]
    for n in lambda_nodes:
        if unit_circle_roots(n.polynomial).size == 0:
            n.status = IGNORED
            n.note = "polynomial in lambda alone with no roots on the unit circle"
    roots = [r for r in _ROOT_ORDER if r in roots]

    for s in spatial_nodes:
        label = s.id[1:]
        if not _has_lambda(s.polynomial):
            carried = FactorNode(f"C{label}", 3, "carry(lambda)", (s.id,), substitution=s.substitution)
            carried.raw = carried.cofactor = carried.polynomial = s.polynomial
            tree.add(carried)
            continue
        for r in roots:
            build.substitute(f"C{label}[{format_root(r)}]", s, r)
        for n in lambda_nodes:
            if n.usable:
                build.resultant(f"C{label}|{n.id}", 3, s, n, ring.lam)
    with_lambda = [s for s in spatial_nodes if _has_lambda(s.polynomial)]
    for s in with_lambda[1:]:
        build.resultant(f"C{s.id[1:]}|{with_lambda[0].id}", 3, s, with_lambda[0], ring.lam)

    for node in tree.stage(3):
        if node.status in (OK, EXHAUSTED) and node.operation != "factor":
            if node.polynomial is not None and (node.polynomial.is_constant() or _is_spatial(node.polynomial)):
                build.factor_leaves(node)
    return tree


__all__ = [
    "EXHAUSTED",
    "FAILED",
    "FactorNode",
    "FactorTree",
    "IGNORED",
    "OK",
    "RESULTANT_TERM_CAP",
    "SKIPPED",
    "eliminate_chain",
    "unit_circle_roots",
]
