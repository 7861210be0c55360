"""Walk definitions on Z^d: direction sets, coins, validation and the example zoo.

A walk is the triple (Z^d, Sigma, U).  Coin row/column ``k`` is bound to
direction ``Sigma[k]``; the order of ``Sigma`` is therefore part of the
definition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .poly.gaussian import GaussianRational

Coin = tuple[tuple[GaussianRational, ...], ...]

ZOO_NAMES = ("grover4", "grover5", "triangular", "hexagonal", "hadamard4")


class WalkSchemaError(ValueError):
    """A walk or initial-state description is malformed.

    ``path`` names the offending field, e.g. ``"coin[2][1].re"``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- coin constructors -----------------------------------------------------------


def _as_coin(rows: Sequence[Sequence]) -> Coin:
    return tuple(tuple(GaussianRational.coerce(c) for c in row) for row in rows)


def identity(n: int) -> Coin:
    return _as_coin([[1 if i == j else 0 for j in range(n)] for i in range(n)])


def make_grover(n: int) -> Coin:
    """Grover coin ``G_n = (2/n) J - I``.

    >>> [str(c) for c in make_grover(4)[0]]
    ['-1/2', '1/2', '1/2', '1/2']
    """
    if n < 1:
        raise ValueError("Grover coin needs n >= 1")
    off = GaussianRational(f"2/{n}")
    return tuple(tuple(off - 1 if i == j else off for j in range(n)) for i in range(n))


def tensor(a: Coin, b: Coin) -> Coin:
    """Kronecker product ``a ⊗ b``."""
    na, nb = len(a), len(b)
    if any(len(r) != na for r in a) or any(len(r) != nb for r in b):
        raise ValueError("tensor factors must be square")
    return tuple(
        tuple(a[i // nb][j // nb] * b[i % nb][j % nb] for j in range(na * nb))
        for i in range(na * nb)
    )


def scale(a: Coin, c) -> Coin:
    c = GaussianRational.coerce(c)
    return tuple(tuple(x * c for x in row) for row in a)


def conjugate_transpose(a: Coin) -> Coin:
    n = len(a)
    return tuple(tuple(a[j][i].conjugate() for j in range(n)) for i in range(n))


def matmul(a: Coin, b: Coin) -> Coin:
    n, m, p = len(a), len(b), len(b[0])
    zero = GaussianRational(0)
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = zero
            for k in range(m):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


PAULI_X = _as_coin([[0, 1], [1, 0]])
# H ⊗ H for the 2x2 Hadamard coin: the 1/sqrt(2) factors combine to a rational 1/2
HADAMARD_SQUARED = scale(tensor(_as_coin([[1, 1], [1, -1]]), _as_coin([[1, 1], [1, -1]])), "1/2")


# -- definitions ------------------------------------------------------------------


@dataclass(frozen=True)
class WalkDefinition:
    """A coined walk on Z^d.

    Parameters
    ----------
    name : str
    d : int
        Lattice dimension.
    directions : tuple of int tuples
        Ordered direction set Sigma; ``directions[k]`` is bound to coin index ``k``.
    coin : Coin or None
        Exact Gaussian-rational coin.  ``None`` for a numeric-only walk, in
        which case ``numeric_coin`` must be given.
    numeric_coin : ndarray, optional
        Complex coin for walks whose entries are not Gaussian rationals.  Only
        the simulator accepts such walks.
    """

    name: str
    d: int
    directions: tuple[tuple[int, ...], ...]
    coin: Coin | None
    numeric_coin: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.directions)

    @property
    def is_exact(self) -> bool:
        return self.coin is not None

    def coin_array(self) -> np.ndarray:
        if self.coin is not None:
            return np.array([[complex(c) for c in row] for row in self.coin], dtype=complex)
        return np.asarray(self.numeric_coin, dtype=complex)

    def require_exact(self) -> Coin:
        if self.coin is None:
            raise ValueError(
                f"walk {self.name!r} has a non-rational coin; the exact layer needs Gaussian-rational entries"
            )
        return self.coin

    def direction_array(self) -> np.ndarray:
        return np.array(self.directions, dtype=int).reshape(self.n, self.d)

    def to_json(self) -> dict:
        coin = self.require_exact()
        return {
            "name": self.name,
            "d": self.d,
            "directions": [list(s) for s in self.directions],
            "coin": [[c.to_json() for c in row] for row in coin],
        }


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate(w: WalkDefinition) -> ValidationReport:
    """Check shape, direction distinctness and exact unitarity ``U^† U = I``."""
    problems: list[str] = []
    n = w.n
    for k, s in enumerate(w.directions):
        if len(s) != w.d:
            problems.append(f"directions[{k}] has length {len(s)}, expected d={w.d}")
    seen: dict[tuple[int, ...], int] = {}
    for k, s in enumerate(w.directions):
        if s in seen:
            problems.append(f"duplicate direction {s} at indices ({seen[s]}, {k})")
        else:
            seen[s] = k
    if w.coin is None:
        u = w.coin_array()
        if u.shape != (n, n):
            problems.append(f"coin has shape {u.shape}, expected ({n}, {n})")
        else:
            err = np.abs(u.conj().T @ u - np.eye(n))
            if err.max() > 1e-12:
                i, j = np.unravel_index(int(err.argmax()), err.shape)
                problems.append(f"U†U[{i},{j}] deviates from identity by {err.max():.3g}")
        return ValidationReport(not problems, problems)
    if len(w.coin) != n or any(len(row) != n for row in w.coin):
        problems.append(f"coin must be {n}x{n} to match {n} directions")
        return ValidationReport(False, problems)
    prod = matmul(conjugate_transpose(w.coin), w.coin)
    for i in range(n):
        for j in range(n):
            want = 1 if i == j else 0
            if prod[i][j] != want:
                problems.append(f"U†U[{i},{j}] = {prod[i][j]}, expected {want}")
    return ValidationReport(not problems, problems)


# -- initial states ---------------------------------------------------------------


@dataclass(frozen=True)
class InitialState:
    """Coin amplitudes placed on a single lattice site."""

    position: tuple[int, ...]
    amplitudes: np.ndarray = field(compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"initial coin amplitudes have squared norm {norm!r}, expected 1")

    @classmethod
    def at_origin(cls, amplitudes: Sequence[complex], d: int = 2) -> InitialState:
        return cls(tuple([0] * d), np.asarray(amplitudes, dtype=complex))


def default_initial_state(name: str) -> InitialState:
    """Initial states of the paper's figures, in the zoo's coin order."""
    if name == "grover4":
        return InitialState.at_origin(np.array([1, 1, -1, -1]) / 2)
    if name == "grover5":
        # order R, L, S, U, D; the caption's prefactor is corrected to unit norm
        return InitialState.at_origin(np.array([1, 1, -1, 1, 1]) / math.sqrt(5))
    if name == "triangular":
        # order U, LD, RD: (i|U> + |RD> - |LD>)/sqrt(3)
        return InitialState.at_origin(np.array([1j, -1, 1]) / math.sqrt(3))
    if name == "hexagonal":
        return InitialState.at_origin(np.ones(6) / math.sqrt(6))
    if name == "hadamard4":
        return InitialState.at_origin(np.array([1, 0, 1, 0]) / math.sqrt(2))
    raise KeyError(f"no default initial state for {name!r}")


# -- zoo ------------------------------------------------------------------------


_AXES = ((1, 0), (-1, 0), (0, 1), (0, -1))


def zoo(name: str) -> WalkDefinition:
    """The five example walks.

    Raises
    ------
    KeyError
        For an unknown name; the message lists the available walks.
    """
    if name == "grover4":
        return WalkDefinition("grover4", 2, _AXES, make_grover(4))
    if name == "grover5":
        return WalkDefinition(
            "grover5", 2, ((1, 0), (-1, 0), (0, 0), (0, 1), (0, -1)), make_grover(5)
        )
    if name == "triangular":
        return WalkDefinition("triangular", 2, ((0, 1), (-1, -1), (1, -1)), make_grover(3))
    if name == "hexagonal":
        return WalkDefinition(
            "hexagonal",
            2,
            ((2, 0), (-1, 1), (-1, -1), (-2, 0), (1, -1), (1, 1)),
            tensor(PAULI_X, make_grover(3)),
        )
    if name == "hadamard4":
        return WalkDefinition("hadamard4", 2, _AXES, HADAMARD_SQUARED)
    raise KeyError(f"unknown walk {name!r}; available: {', '.join(ZOO_NAMES)}")


# -- JSON ----------------------------------------------------------------------------


def _parse_rational(value, path: str) -> GaussianRational:
    try:
        if isinstance(value, dict):
            unknown = set(value) - {"re", "im"}
            if unknown:
                raise WalkSchemaError(path, f"unexpected keys {sorted(unknown)}")
            return GaussianRational(_check_number(value.get("re", "0"), path + ".re"),
                                    _check_number(value.get("im", "0"), path + ".im"))
        return GaussianRational(_check_number(value, path))
    except WalkSchemaError:
        raise
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise WalkSchemaError(path, f"not a rational number ({exc})") from None


def _check_number(value, path: str):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        if isinstance(value, float):
            raise WalkSchemaError(path, "floats are not exact; write rationals as \"p/q\" strings")
        raise WalkSchemaError(path, f"expected a rational string or integer, got {type(value).__name__}")
    return value


def walk_from_json(obj) -> WalkDefinition:
    """Parse ``{name, d, directions, coin}``; raises :class:`WalkSchemaError`."""
    if not isinstance(obj, dict):
        raise WalkSchemaError("$", "walk definition must be a JSON object")
    for key in ("name", "d", "directions", "coin"):
        if key not in obj:
            raise WalkSchemaError(key, "missing field")
    name = obj["name"]
    if not isinstance(name, str):
        raise WalkSchemaError("name", "must be a string")
    d = obj["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise WalkSchemaError("d", "must be a positive integer")
    dirs = obj["directions"]
    if not isinstance(dirs, list) or not dirs:
        raise WalkSchemaError("directions", "must be a nonempty list")
    directions = []
    for k, s in enumerate(dirs):
        if not isinstance(s, list) or len(s) != d:
            raise WalkSchemaError(f"directions[{k}]", f"must be a list of {d} integers")
        for i, e in enumerate(s):
            if isinstance(e, bool) or not isinstance(e, int):
                raise WalkSchemaError(f"directions[{k}][{i}]", "must be an integer")
        directions.append(tuple(s))
    coin = obj["coin"]
    n = len(directions)
    if not isinstance(coin, list) or len(coin) != n:
        raise WalkSchemaError("coin", f"must be a list of {n} rows")
    rows = []
    for i, row in enumerate(coin):
        if not isinstance(row, list) or len(row) != n:
            raise WalkSchemaError(f"coin[{i}]", f"must be a list of {n} entries")
        rows.append(tuple(_parse_rational(c, f"coin[{i}][{j}]") for j, c in enumerate(row)))
    w = WalkDefinition(name, d, tuple(directions), tuple(rows))
    report = validate(w)
    if not report.ok:
        raise WalkSchemaError("coin", "; ".join(report.violations))
    return w


def load_walk(source: str) -> WalkDefinition:
    """A zoo name or a path to a walk-definition JSON file."""
    if source in ZOO_NAMES:
        return zoo(source)
    path = Path(source)
    if not path.exists():
        raise WalkSchemaError("walk", f"{source!r} is neither a zoo walk ({', '.join(ZOO_NAMES)}) nor a file")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise WalkSchemaError("$", f"invalid JSON: {exc}") from None
    return walk_from_json(obj)
