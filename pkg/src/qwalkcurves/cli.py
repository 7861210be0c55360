"""Command-line front end.

Four commands share one set of flags::

    qwalkcurves --command simulate --walk grover4 --t 250 --out grover4.csv
    qwalkcurves --command locus    --walk grover5 --grid 512 --out grover5_locus.csv
    qwalkcurves --command curves   --walk triangular --out triangular_curves.json
    qwalkcurves --command verify   --walk hexagonal

The command may also be given positionally (``qwalkcurves verify --walk grover4``).

Exit codes: 0 success, 1 failed check other than a fixture (e.g. norm
drift or no curves without a budget failure), 2 schema or usage error,
3 budget exhaustion, 4 fixture mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fixtures as fx
from .bifurcate import (
    FULL,
    NAIVE,
    BifurcationCurve,
    GroebnerBudgetExceeded,
    build_system,
    eliminate_chain,
    groebner_eliminate,
    preferred_mode,
    validate_curves,
)
from .bifurcate.chain import NODE_SECONDS, RESULTANT_DEGREE_CAP, RESULTANT_TERM_CAP
from .bifurcate.curves import VALIDATED
from .bifurcate.groebner_route import DEFAULT_GROEBNER_BUDGET
from .poly.budget import Budget
from .poly.factors import primitive_normalize
from .sim import distribution, fourier_propagate, max_amplitude_difference, run, write_distribution
from .spectral import ParametricLocus, char_poly, palindromic_form, quartic_sign_choice, trace_locus
from .walks import InitialState, WalkDefinition, WalkSchemaError, default_initial_state, load_walk

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_SCHEMA = 2
EXIT_BUDGET = 3
EXIT_MISMATCH = 4

COMMANDS = ("simulate", "locus", "curves", "verify")
NORM_TOLERANCE = 1e-8
CONTAINMENT_SLACK = 1e-6
ORACLE_T = 32
ORACLE_GRID = 128
ORACLE_TOLERANCE = 1e-8

log = logging.getLogger("qwalkcurves")


class UsageError(ValueError):
    """Invalid flag combination or value."""


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation.

    Attributes
    ----------
    walk : str
        Zoo name or path to a walk-definition JSON file.
    command : str
        One of ``simulate``, ``locus``, ``curves`` or ``verify``.
    t : int
        Number of steps for ``simulate``.
    grid : int
        θ-grid resolution for ``locus`` and for curve validation; a power of two ≥ 64.
    mode : str
        ``auto``, ``full`` or ``naive`` elimination.
    out : Path or None
        Output path; a name derived from the walk is used when omitted.
    seed : int
        Seed for randomized steps (numeric trivial-factor detection).
    budget_terms, budget_seconds : int or float or None
        Overrides for the elimination budgets.
    init : str or None
        JSON list of initial coin amplitudes for ``simulate``.
    locus : Path or None
        Locus CSV that ``verify`` checks against instead of recomputing.
    """

    walk: str
    command: str
    t: int = 250
    grid: int = 512
    mode: str = "auto"
    out: Path | None = None
    seed: int = 0
    budget_terms: int | None = None
    budget_seconds: float | None = None
    init: str | None = None
    locus: Path | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"command must be one of {', '.join(COMMANDS)}")
        if self.t < 0:
            raise UsageError("--t must be nonnegative")
        if self.grid < 64 or self.grid & (self.grid - 1):
            raise UsageError("--grid must be a power of two and at least 64")
        if self.mode not in ("auto", FULL, NAIVE):
            raise UsageError("--mode must be auto, full or naive")
        if self.budget_terms is not None and self.budget_terms <= 0:
            raise UsageError("--budget-terms must be positive")
        if self.budget_seconds is not None and self.budget_seconds <= 0:
            raise UsageError("--budget-seconds must be positive")

    def output(self, default: str) -> Path:
        return self.out if self.out is not None else Path(default)


# -- helpers --------------------------------------------------------------------------------


def _number(value, path: str) -> complex:
    if isinstance(value, bool):
        raise WalkSchemaError(path, "expected a number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(float(Fraction(value)))
        except (ValueError, ZeroDivisionError):
            raise WalkSchemaError(path, f"cannot parse {value!r} as a rational") from None
    if isinstance(value, dict):
        extra = set(value) - {"re", "im"}
        if extra:
            raise WalkSchemaError(path, f"unexpected keys {sorted(extra)}")
        return _number(value.get("re", 0), f"{path}.re").real + 1j * _number(value.get("im", 0), f"{path}.im").real
    if isinstance(value, list) and len(value) == 2:
        return _number(value[0], f"{path}[0]").real + 1j * _number(value[1], f"{path}[1]").real
    raise WalkSchemaError(path, "expected a number, a 'p/q' string, {re, im} or [re, im]")


def parse_initial_state(text: str, w: WalkDefinition) -> InitialState:
    """Parse a JSON list of coin amplitudes placed at the origin."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WalkSchemaError("init", f"invalid JSON: {exc}") from None
    if not isinstance(obj, list):
        raise WalkSchemaError("init", "expected a list of amplitudes")
    if len(obj) != w.n:
        raise WalkSchemaError("init", f"expected {w.n} amplitudes, got {len(obj)}")
    amps = [_number(v, f"init[{k}]") for k, v in enumerate(obj)]
    try:
        return InitialState.at_origin(amps, w.d)
    except ValueError as exc:
        raise WalkSchemaError("init", str(exc)) from None


def initial_state_for(cfg: RunConfig, w: WalkDefinition) -> InitialState:
    if cfg.init is not None:
        return parse_initial_state(cfg.init, w)
    try:
        return default_initial_state(w.name)
    except KeyError:
        raise WalkSchemaError("init", f"walk {w.name!r} has no default initial state; pass --init") from None


def chain_budget(cfg: RunConfig) -> tuple[Budget, float | None]:
    terms = cfg.budget_terms or RESULTANT_TERM_CAP
    seconds = cfg.budget_seconds or NODE_SECONDS
    return Budget(max_terms=terms, max_degree=RESULTANT_DEGREE_CAP), seconds


def groebner_budget(cfg: RunConfig) -> Budget:
    base = DEFAULT_GROEBNER_BUDGET
    return Budget(
        max_terms=cfg.budget_terms or base.max_terms,
        max_degree=base.max_degree,
        max_steps=base.max_steps,
        seconds=cfg.budget_seconds or base.seconds,
    )


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


# -- commands -------------------------------------------------------------------------------


def simulate(cfg: RunConfig) -> int:
    """Run the walk and write the distribution CSV plus its JSON sidecar."""
    w = load_walk(cfg.walk)
    init = initial_state_for(cfg, w)
    state = run(w, init, cfg.t)
    norm_error = abs(state.norm_squared() - 1.0)
    out = cfg.output(f"{w.name}_t{cfg.t}.csv")
    sidecar = write_distribution(distribution(state), out, w.name, norm_error)
    print(f"wrote {out} and {sidecar}: {len(state.support())} sites, norm error {norm_error:.3e}")
    return EXIT_OK if norm_error < NORM_TOLERANCE else EXIT_FAILED


def locus(cfg: RunConfig) -> int:
    """Write the locus CSV, a summary JSON and, for symmetric quartics, per-sign files."""
    w = load_walk(cfg.walk)
    cp = char_poly(w, seed=cfg.seed)
    loc = trace_locus(w, cfg.grid, cp)
    out = cfg.output(f"{w.name}_locus.csv")
    loc.to_csv(out)
    summary = {
        "walk": w.name,
        "grid": cfg.grid,
        "samples": len(loc),
        "branches": {str(int(b)): int((loc.branch == b).sum()) for b in np.unique(loc.branch)},
        "dropped": loc.dropped,
        "files": {"locus": out.name},
    }
    form = palindromic_form(cp)
    if form is not None and form.degree == 4 and len(loc):
        choice = quartic_sign_choice(cp, loc.theta, loc.eigenvalue)
        for label, sign in (("plus", 1), ("minus", -1)):
            path = _sidecar(out, f".{label}.csv")
            loc.subset(choice == sign).to_csv(path)
            summary["files"][label] = path.name
        summary["sign_choice_samples"] = {"plus": int((choice > 0).sum()), "minus": int((choice < 0).sum())}
    summary_path = out.with_suffix(".json")
    _write_json(summary_path, summary)
    print(f"wrote {out} ({len(loc)} samples, dropped {loc.dropped}) and {summary_path}")
    return EXIT_OK


@dataclass
class CurveRun:
    """Outcome of the elimination step of ``curves``."""

    mode: str
    curves: list[BifurcationCurve]
    failures: list[dict]
    tree: list[dict] | None = None


def compute_curves(cfg: RunConfig, w: WalkDefinition, mode: str | None = None) -> CurveRun:
    """Run the elimination in the configured mode.

    ``auto`` picks the mode from the size of the system and falls back to
    the resultant chain when the Gröbner route runs out of budget; an
    explicit ``full`` re-raises :class:`GroebnerBudgetExceeded`.
    """
    cp = char_poly(w, seed=cfg.seed)
    requested = mode or cfg.mode
    chosen = preferred_mode(cp) if requested == "auto" else requested
    failures: list[dict] = []
    if chosen == FULL:
        try:
            curves = groebner_eliminate(build_system(cp, FULL), groebner_budget(cfg))
            return CurveRun(FULL, curves, failures)
        except GroebnerBudgetExceeded as exc:
            if requested == FULL:
                raise
            log.warning("Gröbner route exhausted its budget (%s); falling back to the resultant chain", exc)
            failures.append({"branch": "groebner", "reason": str(exc)})
    budget, seconds = chain_budget(cfg)
    tree = eliminate_chain(build_system(cp, NAIVE), budget, node_seconds=seconds)
    failures += [{"branch": n.id, "reason": n.note} for n in tree.failures()]
    return CurveRun(NAIVE, tree.curves(), failures, tree.to_json())


def curves(cfg: RunConfig) -> int:
    """Eliminate, validate against the locus and write the curve list as JSON."""
    w = load_walk(cfg.walk)
    if w.d != 2:
        raise WalkSchemaError("d", "bifurcation curves are computed for two-dimensional walks")
    try:
        result = compute_curves(cfg, w)
    except GroebnerBudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if result.curves:
        validate_curves(result.curves, trace_locus(w, cfg.grid))
    out = cfg.output(f"{w.name}_curves.json")
    _write_json(out, [c.to_json() for c in result.curves])
    report = {"walk": w.name, "mode": result.mode, "grid": cfg.grid, "failures": result.failures}
    if result.tree is not None:
        report["tree"] = result.tree
    _write_json(_sidecar(out, ".tree.json"), report)
    for c in result.curves:
        score = "-" if c.score is None else f"{c.score:.2f}"
        print(f"{c.status:16s} {score:>5s}  {c.f}    [{' > '.join(c.provenance)}]")
    for f in result.failures:
        print(f"budget: {f['branch']}: {f['reason']}", file=sys.stderr)
    print(f"wrote {out} ({len(result.curves)} curves, mode {result.mode})")
    if result.curves:
        return EXIT_OK
    return EXIT_BUDGET if result.failures else EXIT_FAILED


def _poly_diff(expected, got) -> str:
    diff = got - expected
    return f"expected {expected}\n         got      {got}\n         got - expected = {diff}"


def verify(cfg: RunConfig) -> int:
    """Check a zoo walk against its published fixtures and print one line per check."""
    w = load_walk(cfg.walk)
    if w.name not in fx.FIXTURES:
        raise WalkSchemaError("name", f"no fixtures for walk {w.name!r}; verify needs a zoo walk name")
    fixture = fx.fixture(w.name)
    results: list[tuple[str, bool | None, str]] = []

    cp = char_poly(w, seed=cfg.seed)
    ring = cp.ring
    trivial = ring.one
    for f, m in cp.trivial:
        trivial = trivial * f**m
    want_p, want_t = fx.parse(fixture.char_poly, ring), fx.parse(fixture.trivial, ring)
    got_p, got_t = primitive_normalize(cp.p), primitive_normalize(trivial)
    char_ok = got_p == want_p and got_t == want_t
    detail = "nontrivial and trivial factors match"
    if got_p != want_p:
        detail = "nontrivial factor differs:\n         " + _poly_diff(want_p, got_p)
    elif got_t != want_t:
        detail = "trivial factors differ:\n         " + _poly_diff(want_t, got_t)
    results.append(("char-poly", char_ok, detail))

    if cfg.locus is not None:
        loc = ParametricLocus.read_csv(cfg.locus)
        source = str(cfg.locus)
    else:
        loc = trace_locus(w, cfg.grid, cp)
        source = f"grid {cfg.grid}"
    if fixture.containment is not None:
        text, bound = fixture.containment
        q = ring.parse(text)
        values = np.real(q.evaluate_array({ring.X(1): loc.X[:, 0], ring.X(2): loc.X[:, 1]}))
        worst = float(values.max()) if len(values) else float("-inf")
        ok = worst <= bound + CONTAINMENT_SLACK
        results.append(("locus-containment", ok, f"max {text} = {worst:.9f} (bound {bound:g}, {source})"))
    else:
        results.append(("locus-containment", None, "no published bound for this walk"))

    init = default_initial_state(w.name)
    direct = run(w, init, ORACLE_T)
    fourier = fourier_propagate(w, init, ORACLE_T, ORACLE_GRID)
    gap = max_amplitude_difference(direct, fourier)
    results.append(("oracle-equivalence", gap < ORACLE_TOLERANCE, f"max amplitude difference {gap:.2e} at t={ORACLE_T}"))

    budget_hit = False
    if not char_ok:
        results.append(("curves", False, "skipped: the characteristic polynomial differs from the fixture"))
    else:
        mode = fixture.curve_mode if cfg.mode == "auto" else cfg.mode
        try:
            run_ = compute_curves(cfg, w, mode)
        except GroebnerBudgetExceeded as exc:
            budget_hit = True
            results.append(("curves", False, f"budget exhausted: {exc}"))
        else:
            validate_curves(run_.curves, loc)
            found = {primitive_normalize(c.f): c for c in run_.curves}
            for cf in fixture.curves:
                want = fx.parse(cf.text, ring)
                curve = found.get(want)
                if curve is None:
                    results.append((f"curve {want}", False, f"not among the {len(run_.curves)} leaves ({run_.mode} mode)"))
                    budget_hit = budget_hit or bool(run_.failures)
                    continue
                status = f"status {curve.status}, score {curve.score if curve.score is None else round(curve.score, 3)}"
                if cf.kind == fx.STATUS_ONLY:
                    results.append((f"curve {want}", True, f"produced; {status} (reported only, legitimacy uncertain)"))
                else:
                    results.append((f"curve {want}", True, f"produced; {status}"))
            extra = [c for c in run_.curves if primitive_normalize(c.f) not in {fx.parse(cf.text, ring) for cf in fixture.curves}]
            validated_extra = sum(c.status == VALIDATED for c in extra)
            results.append(("extra-leaves", None, f"{len(extra)} further leaves, {validated_extra} validated"))

    failed = False
    for name, ok, detail in results:
        label = "PASS" if ok else ("INFO" if ok is None else "FAIL")
        failed = failed or ok is False
        print(f"{label} {w.name} {name}: {detail}")
    if not failed:
        return EXIT_OK
    return EXIT_BUDGET if budget_hit else EXIT_MISMATCH


HANDLERS = {"simulate": simulate, "locus": locus, "curves": curves, "verify": verify}


# -- entry point ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalkcurves",
        description="Simulate coined quantum walks, trace polynomial-decay loci and compute bifurcation curves.",
    )
    parser.add_argument("positional_command", nargs="?", choices=COMMANDS, metavar="COMMAND", help="same as --command")
    parser.add_argument("--command", choices=COMMANDS)
    parser.add_argument("--walk", required=True, help="zoo name (grover4, grover5, triangular, hexagonal, hadamard4) or walk JSON path")
    parser.add_argument("--t", type=int, default=250, help="number of steps for simulate (default 250)")
    parser.add_argument("--grid", type=int, default=512, help="theta grid resolution, a power of two >= 64 (default 512)")
    parser.add_argument("--mode", default="auto", choices=("auto", FULL, NAIVE), help="elimination route (default auto)")
    parser.add_argument("--out", type=Path, help="output file")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized steps (default 0)")
    parser.add_argument("--budget-terms", type=int, help="term cap per resultant or Gröbner run")
    parser.add_argument("--budget-seconds", type=float, help="wall-clock cap per resultant or Gröbner phase")
    parser.add_argument("--init", help="JSON list of initial coin amplitudes (simulate)")
    parser.add_argument("--locus", type=Path, help="locus CSV to check against (verify)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log elimination progress")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command and args.positional_command and args.command != args.positional_command:
        raise UsageError("conflicting commands given")
    command = args.command or args.positional_command
    if command is None:
        raise UsageError("a command is required (--command simulate|locus|curves|verify)")
    return RunConfig(
        walk=args.walk,
        command=command,
        t=args.t,
        grid=args.grid,
        mode=args.mode,
        out=args.out,
        seed=args.seed,
        budget_terms=args.budget_terms,
        budget_seconds=args.budget_seconds,
        init=args.init,
        locus=args.locus,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except WalkSchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
