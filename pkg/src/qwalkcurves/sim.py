"""Numeric time evolution of coined walks on Z^d.

The walk operator is ``Q = T (I ⊗ U)``: the coin acts on every site, then
the component in slot ``k`` moves from ``g`` to ``g + Σ[k]``.  Two
independent propagators are provided: :func:`run` works in position space
and :func:`fourier_propagate` applies the multiplier matrix
``M(θ) = diag(e^{iσ_k·θ}) U`` pointwise on a periodic grid.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
from scipy import ndimage

from .walks import InitialState, WalkDefinition

DENSE_OCCUPANCY = 0.25


class AliasingError(ValueError):
    """The Fourier grid is too small to hold the evolved support without wrap-around."""


# -- states ----------------------------------------------------------------------


class WalkState:
    """Amplitudes ``ψ(g) ∈ C^n`` on a finite set of lattice sites at time ``time``.

    Storage is either sparse (``{site: vector}``) or a dense box
    ``array[k, i_1, ..., i_d]`` whose corner ``offset`` is the lattice point of
    index ``(0, ..., 0)``.  Sparse states switch to dense once the occupied
    sites fill more than a quarter of their bounding box.
    """

    __slots__ = ("n", "d", "time", "_sparse", "_offset", "_array")

    def __init__(self, n: int, d: int, time: int = 0):
        self.n = n
        self.d = d
        self.time = time
        self._sparse: dict[tuple[int, ...], np.ndarray] | None = {}
        self._offset: tuple[int, ...] | None = None
        self._array: np.ndarray | None = None

    @classmethod
    def from_initial(cls, init: InitialState, n: int) -> WalkState:
        if init.amplitudes.shape != (n,):
            raise ValueError(f"initial state has {init.amplitudes.size} coin slots, walk has {n}")
        st = cls(n, len(init.position))
        st._sparse[tuple(init.position)] = init.amplitudes.copy()
        return st

    @classmethod
    def from_dense(cls, offset: tuple[int, ...], array: np.ndarray, time: int = 0) -> WalkState:
        st = cls(array.shape[0], array.ndim - 1, time)
        st._sparse = None
        st._offset = tuple(int(o) for o in offset)
        st._array = np.asarray(array, dtype=complex)
        return st

    @property
    def is_dense(self) -> bool:
        return self._array is not None

    def items(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        """Occupied sites and their coin vectors (zero vectors skipped)."""
        if self._sparse is not None:
            yield from self._sparse.items()
            return
        occupied = np.argwhere(np.any(self._array != 0, axis=0))
        for idx in occupied:
            site = tuple(int(i + o) for i, o in zip(idx, self._offset))
            yield site, self._array[(slice(None), *idx)]

    def amplitude(self, site: tuple[int, ...]) -> np.ndarray:
        site = tuple(site)
        if self._sparse is not None:
            return self._sparse.get(site, np.zeros(self.n, dtype=complex))
        idx = tuple(s - o for s, o in zip(site, self._offset))
        if all(0 <= i < m for i, m in zip(idx, self._array.shape[1:])):
            return self._array[(slice(None), *idx)]
        return np.zeros(self.n, dtype=complex)

    def support(self) -> list[tuple[int, ...]]:
        return [s for s, _ in self.items()]

    def norm_squared(self) -> float:
        if self._sparse is not None:
            return float(sum(np.vdot(v, v).real for v in self._sparse.values()))
        return float(np.vdot(self._array, self._array).real)

    def bounding_box(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Inclusive lower and upper corners of the occupied sites."""
        if self._sparse is not None:
            if not self._sparse:
                raise ValueError("empty state")
            pts = np.array(list(self._sparse))
            return tuple(pts.min(axis=0)), tuple(pts.max(axis=0))
        occupied = np.argwhere(np.any(self._array != 0, axis=0))
        lo = occupied.min(axis=0) + self._offset
        hi = occupied.max(axis=0) + self._offset
        return tuple(int(v) for v in lo), tuple(int(v) for v in hi)

    def to_dense(self) -> tuple[tuple[int, ...], np.ndarray]:
        """``(offset, array)`` covering at least the occupied sites."""
        if self._array is not None:
            return self._offset, self._array
        lo, hi = self.bounding_box()
        shape = (self.n,) + tuple(h - l + 1 for l, h in zip(lo, hi))
        arr = np.zeros(shape, dtype=complex)
        for site, vec in self._sparse.items():
            arr[(slice(None), *(s - l for s, l in zip(site, lo)))] = vec
        return lo, arr

    def densify(self) -> None:
        if self._sparse is not None:
            self._offset, self._array = self.to_dense()
            self._sparse = None

    def __repr__(self) -> str:
        kind = "dense" if self.is_dense else "sparse"
        return f"WalkState(n={self.n}, d={self.d}, time={self.time}, {kind})"


def max_amplitude_difference(a: WalkState, b: WalkState) -> float:
    """Largest ``|ψ_a(g)_k − ψ_b(g)_k|`` over all sites and slots."""
    sites = set(a.support()) | set(b.support())
    worst = 0.0
    for s in sites:
        worst = max(worst, float(np.max(np.abs(a.amplitude(s) - b.amplitude(s)))))
    return worst


# -- position-space evolution -------------------------------------------------------------


def _coin_and_shifts(w: WalkDefinition) -> tuple[np.ndarray, np.ndarray]:
    return w.coin_array(), w.direction_array()


def step(state: WalkState, w: WalkDefinition) -> WalkState:
    """One application of ``Q = T (I ⊗ U)``."""
    if state.n != w.n:
        raise ValueError(f"state has {state.n} coin slots, walk has {w.n}")
    coin, shifts = _coin_and_shifts(w)
    if state.is_dense:
        return _step_dense(state, coin, shifts)
    out: dict[tuple[int, ...], np.ndarray] = {}
    for site, vec in state._sparse.items():
        mixed = coin @ vec
        for k in range(w.n):
            if mixed[k] == 0:
                continue
            target = tuple(int(s + e) for s, e in zip(site, shifts[k]))
            slot = out.get(target)
            if slot is None:
                slot = out[target] = np.zeros(w.n, dtype=complex)
            slot[k] += mixed[k]
    new = WalkState(state.n, state.d, state.time + 1)
    new._sparse = out
    if out:
        lo, hi = new.bounding_box()
        volume = int(np.prod([h - l + 1 for l, h in zip(lo, hi)]))
        if len(out) > DENSE_OCCUPANCY * volume:
            new.densify()
    return new


def _step_dense(state: WalkState, coin: np.ndarray, shifts: np.ndarray) -> WalkState:
    arr = state._array
    mixed = np.tensordot(coin, arr, axes=([1], [0]))
    lo_pad = np.maximum(-shifts.min(axis=0), 0)
    hi_pad = np.maximum(shifts.max(axis=0), 0)
    shape = (arr.shape[0],) + tuple(m + a + b for m, a, b in zip(arr.shape[1:], lo_pad, hi_pad))
    out = np.zeros(shape, dtype=complex)
    for k, sigma in enumerate(shifts):
        start = lo_pad + sigma
        idx = tuple(slice(int(s), int(s) + m) for s, m in zip(start, arr.shape[1:]))
        out[(k, *idx)] += mixed[k]
    offset = tuple(int(o - p) for o, p in zip(state._offset, lo_pad))
    return WalkState.from_dense(offset, out, state.time + 1)


def run(w: WalkDefinition, init: InitialState, t: int) -> WalkState:
    """``Q^t Ψ_0`` by repeated :func:`step`."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    state = WalkState.from_initial(init, w.n)
    for _ in range(t):
        state = step(state, w)
    return state


# -- Fourier-space oracle -----------------------------------------------------------------


def reachable_extent(w: WalkDefinition, init: InitialState, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis bounds on the support of ``Q^t Ψ_0`` relative to the start site.

    Uses the zero pattern of the coin: slot ``j`` can only be fed from slot
    ``k`` when ``U[j, k] ≠ 0``, so the extreme displacements are longest paths
    in a max-plus recursion over slots.  This is never smaller than the true
    support, and often tighter than ``t · max‖σ‖``.
    """
    coin, shifts = _coin_and_shifts(w)
    feeds = np.abs(coin) > 0
    active = np.abs(init.amplitudes) > 0
    lo = np.zeros(w.d, dtype=int)
    hi = np.zeros(w.d, dtype=int)
    if t == 0:
        return lo, hi
    for axis in range(w.d):
        s = shifts[:, axis].astype(float)
        best = np.where(active, 0.0, -np.inf)
        worst = np.where(active, 0.0, np.inf)
        for _ in range(t):
            cand_hi = np.where(feeds, best[None, :], -np.inf).max(axis=1)
            cand_lo = np.where(feeds, worst[None, :], np.inf).min(axis=1)
            best = cand_hi + s
            worst = cand_lo + s
        hi[axis] = int(best[np.isfinite(best)].max())
        lo[axis] = int(worst[np.isfinite(worst)].min())
    return lo, hi


def multiplier_grid(w: WalkDefinition, gridsize: int) -> np.ndarray:
    """``M(θ)`` at every grid frequency; shape ``(g, ..., g, n, n)``."""
    coin, shifts = _coin_and_shifts(w)
    theta_1d = 2 * np.pi * np.fft.fftfreq(gridsize)
    mesh = np.meshgrid(*([theta_1d] * w.d), indexing="ij")
    theta = np.stack(mesh, axis=-1)
    phases = np.exp(1j * theta @ shifts.T)
    return phases[..., :, None] * coin


def fourier_propagate(w: WalkDefinition, init: InitialState, t: int, gridsize: int) -> WalkState:
    """Propagate with the multiplier matrix on a periodic ``gridsize^d`` grid.

    Raises
    ------
    AliasingError
        If the evolved support would wrap around the grid on some axis.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    lo, hi = reachable_extent(w, init, t)
    for axis, (a, b) in enumerate(zip(lo, hi)):
        if gridsize <= b - a:
            raise AliasingError(
                f"grid {gridsize} too small: support spans {b - a + 1} sites on axis {axis} after {t} steps"
            )
    n, d = w.n, w.d
    origin = np.asarray(init.position) + lo
    psi = np.zeros((n,) + (gridsize,) * d, dtype=complex)
    psi[(slice(None), *(-lo))] = init.amplitudes
    # F[ψ](θ) = Σ_g ψ(g) e^{i g·θ}: a shift by σ becomes multiplication by e^{iσ·θ}
    axes = tuple(range(1, d + 1))
    hat = np.fft.ifftn(psi, axes=axes) * gridsize**d
    hat = np.moveaxis(hat, 0, -1)
    mult = multiplier_grid(w, gridsize)
    for _ in range(t):
        hat = np.einsum("...jk,...k->...j", mult, hat)
    hat = np.moveaxis(hat, -1, 0)
    out = np.fft.fftn(hat, axes=axes) / gridsize**d
    return WalkState.from_dense(tuple(int(o) for o in origin), out, t)


# -- distributions ------------------------------------------------------------------------


@dataclass
class Distribution:
    """Site probabilities at time ``time``; ``sites`` is an ``(N, d)`` integer array."""

    sites: np.ndarray
    probabilities: np.ndarray
    time: int

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in s): float(p) for s, p in zip(self.sites, self.probabilities)}

    def total(self) -> float:
        return float(self.probabilities.sum())

    def scaled_sites(self) -> np.ndarray:
        """``X = site / t``."""
        if self.time <= 0:
            raise ValueError("scaled coordinates need time > 0")
        return self.sites / self.time


def distribution(state: WalkState) -> Distribution:
    """Per-site probability ``Σ_k |ψ(g)_k|²``."""
    if state.is_dense:
        probs = np.sum(np.abs(state._array) ** 2, axis=0)
        idx = np.argwhere(probs > 0)
        sites = idx + np.asarray(state._offset)
        return Distribution(sites.astype(int), probs[tuple(idx.T)], state.time)
    sites, probs = [], []
    for site, vec in sorted(state._sparse.items()):
        p = float(np.vdot(vec, vec).real)
        if p > 0:
            sites.append(site)
            probs.append(p)
    return Distribution(
        np.array(sites, dtype=int).reshape(-1, state.d), np.array(probs, dtype=float), state.time
    )


Predicate = Callable[[np.ndarray], np.ndarray]


def region_mass(dist: Distribution, region, margin: float = 0.0) -> float:
    """Probability carried by sites whose scaled coordinate lies in ``region`` inflated by ``margin``.

    Parameters
    ----------
    dist : Distribution
        Must have ``time > 0``.
    region : callable or object with ``contains``
        Vectorized predicate on scaled coordinates ``X`` of shape ``(N, d)``.
        Objects exposing ``contains(X)`` (such as bifurcation curves) are
        accepted too.
    margin : float
        Inflation radius in scaled units.  A site counts when it lies within
        ``margin`` of a lattice site satisfying the predicate; on the lattice
        ``Z^d / t`` this is within ``1/t`` of the exact Euclidean inflation and
        never larger.
    """
    if dist.time <= 0:
        raise ValueError("region_mass needs a distribution at time > 0")
    predicate = getattr(region, "contains", region)
    X = dist.scaled_sites()
    inside = np.asarray(predicate(X), dtype=bool)
    if margin > 0 and inside.any() and not inside.all():
        inside = inside | _within_margin(dist.sites, inside, margin * dist.time)
    return float(dist.probabilities[inside].sum())


def _within_margin(sites: np.ndarray, inside: np.ndarray, radius: float) -> np.ndarray:
    """Sites within Euclidean ``radius`` (lattice units) of an inside site."""
    r = int(np.ceil(radius))
    lo = sites.min(axis=0) - r
    hi = sites.max(axis=0) + r
    mask = np.ones(tuple(hi - lo + 1), dtype=bool)
    mask[tuple((sites[inside] - lo).T)] = False
    dist = ndimage.distance_transform_edt(mask)
    return dist[tuple((sites - lo).T)] <= radius


# -- export ----------------------------------------------------------------------------------


def write_distribution(dist: Distribution, path: str | Path, walk_name: str, norm_error: float) -> Path:
    """Write ``x,y,probability`` rows (sorted by site) plus a JSON sidecar.

    Returns the sidecar path (``<path>.json`` with the CSV suffix replaced).
    """
    path = Path(path)
    order = np.lexsort(dist.sites.T[::-1])
    header = [f"x{i + 1}" for i in range(dist.sites.shape[1])] if dist.sites.shape[1] != 2 else ["x", "y"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header + ["probability"])
        for i in order:
            writer.writerow([*(int(v) for v in dist.sites[i]), repr(float(dist.probabilities[i]))])
    sidecar = path.with_suffix(".json")
    sidecar.write_text(
        json.dumps({"walk": walk_name, "t": dist.time, "norm_error": norm_error}, indent=2) + "\n"
    )
    return sidecar
