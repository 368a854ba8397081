"""Finite signed measures on the half line, sampled grids and trajectories.

A measure is a finite list of point masses plus an optional density with
bounded support.  Convolutions ``(nu * x)(t) = int_[0,t] nu(ds) x(t - s)``
are evaluated against sampled trajectories with the composite trapezoid
rule; atoms read the trajectory by linear interpolation.

Convolutions against a measure with atoms away from zero jump at
``t = tau_j`` (by ``w_j x(0)``).  Both one-sided values are available:
``side="right"`` counts an atom once ``tau_j <= t``, ``side="left"`` only
once ``tau_j < t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, EvaluationError
from .quadrature import SNAP, convolve_full, interpolate, snap_index


@dataclass(frozen=True)
class Grid:
    """Uniform mesh ``t_i = i*h``, ``i = 0..n_points-1``, covering ``[0, T]``."""

    h: float
    T: float

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigurationError(f"grid step must be positive, got {self.h}")
        if not self.T >= self.h:
            raise ConfigurationError(f"grid horizon {self.T} is shorter than the step {self.h}")

    @property
    def n_points(self) -> int:
        return int(math.floor(self.T / self.h + SNAP)) + 1

    @property
    def t_last(self) -> float:
        return (self.n_points - 1) * self.h

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_points) * self.h

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.h / factor, self.T)

    def truncated(self, T: float) -> "Grid":
        return Grid(self.h, T)

    def index_of(self, t: float) -> int:
        """Node index of ``t``; raises if ``t`` is not (numerically) a node."""
        k, frac = snap_index(t / self.h)
        if frac != 0 or not 0 <= k < self.n_points:
            raise DomainError(f"t={t} is not a node of {self}")
        return int(k)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of a function on a grid; linear in between, zero for t < 0."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"trajectory needs {self.grid.n_points} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, grid: Grid) -> "Trajectory":
        return cls(grid, np.asarray(func(grid.times), dtype=float))

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tol = SNAP * max(1.0, self.grid.t_last)
        if np.any(t > self.grid.t_last + tol):
            raise DomainError(f"trajectory evaluated beyond its last node {self.grid.t_last}")
        out = interpolate(self.values, self.grid.h, np.minimum(t, self.grid.t_last))
        return out if out.ndim else float(out)

    def on(self, grid: Grid) -> "Trajectory":
        """Restrict to a coarser grid whose nodes are a subset of ours."""
        ratio = grid.h / self.grid.h
        stride = int(round(ratio))
        if abs(ratio - stride) > SNAP * ratio or grid.t_last > self.grid.t_last * (1 + SNAP):
            raise ConfigurationError("target grid nodes are not a subset of the trajectory grid")
        return Trajectory(grid, self.values[: stride * (grid.n_points - 1) + 1: stride])

    def __add__(self, other):
        _check_same_grid(self, other)
        return Trajectory(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return Trajectory(self.grid, self.values - other.values)

    def __mul__(self, c):
        return Trajectory(self.grid, c * self.values)

    __rmul__ = __mul__

    def sup_distance(self, other) -> float:
        _check_same_grid(self, other)
        return float(np.max(np.abs(self.values - other.values)))


def _check_same_grid(a: Trajectory, b: Trajectory):
    if a.grid != b.grid:
        raise ConfigurationError(f"grid mismatch: {a.grid} vs {b.grid}")


# -- densities ----------------------------------------------------------------

@dataclass(frozen=True)
class Density:
    """An integrable kernel ``k(s)`` on ``[0, s_max]`` (zero beyond)."""

    func: Callable[[np.ndarray], np.ndarray]
    s_max: float
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.s_max > 0 and math.isfinite(self.s_max)):
            raise ConfigurationError(f"density support bound must be finite and positive, got {self.s_max}")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        try:
            with np.errstate(all="raise", under="ignore"):
                out = np.asarray(self.func(s), dtype=float) * np.ones_like(s)
        except (FloatingPointError, ValueError, OverflowError, ZeroDivisionError) as exc:
            raise EvaluationError(f"density {self.name} failed to evaluate: {exc}") from exc
        bad = ~np.isfinite(out)
        if np.any(bad):
            node = np.atleast_1d(s)[np.atleast_1d(bad)][0]
            raise EvaluationError(f"density {self.name} is not finite at s={node}")
        return out


def exp_decay(rate: float, s_max: float, scale: float = 1.0) -> Density:
    """``scale * exp(-rate*s)`` truncated at ``s_max``."""
    return Density(lambda s: scale * np.exp(-rate * s), s_max, "exp_decay",
                   {"rate": rate, "scale": scale})


def constant_density(c: float, s_max: float) -> Density:
    return Density(lambda s: np.full_like(s, c), s_max, "constant", {"c": c})


def polynomial_density(coeffs: Sequence[float], s_max: float) -> Density:
    """``sum_j coeffs[j] * s**j`` on ``[0, s_max]``."""
    coeffs = tuple(float(c) for c in coeffs)
    poly = np.polynomial.Polynomial(coeffs)
    return Density(lambda s: poly(s), s_max, "polynomial", {"coeffs": list(coeffs)})


DENSITIES = {
    "exp_decay": lambda p: exp_decay(p["rate"], p["s_max"], p.get("scale", 1.0)),
    "constant": lambda p: constant_density(p["c"], p["s_max"]),
    "polynomial": lambda p: polynomial_density(p["coeffs"], p["s_max"]),
}


# -- measures -----------------------------------------------------------------

@dataclass(frozen=True)
class Measure:
    """Atoms ``[(location, weight), ...]`` plus an optional density."""

    atoms: tuple = ()
    density: Optional[Density] = None

    def __post_init__(self):
        atoms = tuple((float(loc), float(w)) for loc, w in self.atoms)
        locs = [loc for loc, _ in atoms]
        if any(loc < 0 or not math.isfinite(loc) for loc in locs):
            raise ConfigurationError(f"atom locations must be finite and >= 0: {locs}")
        if len(set(locs)) != len(locs):
            raise ConfigurationError(f"atom locations must be distinct: {locs}")
        if any(not math.isfinite(w) for _, w in atoms):
            raise ConfigurationError("atom weights must be finite")
        object.__setattr__(self, "atoms", tuple(sorted(atoms)))

    @property
    def mass_at_zero(self) -> float:
        return sum(w for loc, w in self.atoms if loc == 0.0)

    def __str__(self):
        parts = [f"{w:+g}*delta_{loc:g}" for loc, w in self.atoms]
        if self.density is not None:
            parts.append(f"{self.density.name}{self.density.params} on [0,{self.density.s_max:g}]")
        return " ".join(parts) or "0"


def total_variation(m: Measure, resolution: int = 4096) -> float:
    """``sum |w_j| + int_0^{s_max} |k(s)| ds`` (density by composite trapezoid)."""
    tv = sum(abs(w) for _, w in m.atoms)
    if m.density is not None:
        s = np.linspace(0.0, m.density.s_max, resolution + 1)
        k = np.abs(m.density(s))
        tv += float((s[1] - s[0]) * (k.sum() - 0.5 * (k[0] + k[-1])))
    return tv


def convolve_measure(m: Measure, x: Trajectory, t: float, side: str = "right") -> float:
    """``(nu * x)(t)`` for a single time ``t`` in ``[0, T]``."""
    h = x.grid.h
    tol = SNAP * max(1.0, x.grid.t_last)
    if not (-tol <= t <= x.grid.t_last + tol):
        raise DomainError(f"convolution time {t} outside [0, {x.grid.t_last}]")
    t = min(max(t, 0.0), x.grid.t_last)
    total = 0.0
    for loc, w in m.atoms:
        gap = t - loc
        if gap > tol or (abs(gap) <= tol and (side == "right" or loc == 0.0)):
            total += w * x(max(gap, 0.0))
    if m.density is not None and t > 0:
        upper = min(t, m.density.s_max)
        K, frac = snap_index(upper / h)
        s = np.arange(K + 1) * h
        vals = m.density(s) * x(t - s)
        total += h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
        if frac > 0:
            end = m.density(np.array([upper]))[0] * x(t - upper)
            total += 0.5 * (upper - K * h) * (vals[-1] + end)
    return float(total)


@dataclass(frozen=True)
class _AtomPlan:
    """Atoms resolved against a step size: on-node shifts and interpolated ones."""

    weight: float
    shift: int          # whole grid steps
    frac: float         # fractional part of the shift (0 for on-node atoms)

    @property
    def on_node(self) -> bool:
        return self.frac == 0.0


def atom_plans(m: Measure, h: float) -> list:
    plans = []
    for loc, w in m.atoms:
        k, frac = snap_index(loc / h)
        plans.append(_AtomPlan(w, int(k), float(frac)))
    return plans


class DensityStencil:
    """Trapezoid weights for the density part of ``nu * x`` on a grid.

    ``node(i, x)`` gives the density convolution at ``t_i`` using
    ``x[0..i]`` and matches :func:`convolve_measure` exactly.
    """

    def __init__(self, density: Density, h: float, n: int):
        self.h = h
        K, frac = snap_index(density.s_max / h)
        self.K = int(K)
        self.delta = frac * h          # length of the trailing partial panel
        m = min(self.K, n - 1) + 1
        self.k = density(np.arange(m) * h)
        self.k_end = float(density(np.array([density.s_max]))[0]) if self.delta > 0 else 0.0
        self.lam = frac

    @property
    def self_weight(self) -> float:
        """Coefficient of ``x_i`` in the value at node ``i >= 1``."""
        return 0.5 * self.h * self.k[0]

    def node(self, i: int, x: np.ndarray) -> float:
        h, k = self.h, self.k
        if i == 0:
            return 0.0
        if i <= self.K:
            seg = x[: i + 1][::-1]
            return h * (float(np.dot(k[: i + 1], seg)) - 0.5 * (k[0] * x[i] + k[i] * x[0]))
        K = self.K
        seg = x[i - K: i + 1][::-1]
        val = h * (float(np.dot(k[: K + 1], seg)) - 0.5 * (k[0] * x[i] + k[K] * x[i - K]))
        if self.delta > 0:
            x_end = (1.0 - self.lam) * x[i - K] + self.lam * x[i - K - 1]
            val += 0.5 * self.delta * (k[K] * x[i - K] + self.k_end * x_end)
        return val

    def grid(self, x: np.ndarray) -> np.ndarray:
        h, k, K = self.h, self.k, self.K
        n = len(x)
        out = h * convolve_full(x, k)
        out -= 0.5 * h * k[0] * x
        idx = np.arange(n)
        head = idx <= K
        out[head] -= 0.5 * h * k[np.minimum(idx[head], len(k) - 1)] * x[0]
        if n > K + 1:
            tail = idx[K + 1:]
            out[tail] -= 0.5 * h * k[K] * x[tail - K]
            if self.delta > 0:
                x_end = (1.0 - self.lam) * x[tail - K] + self.lam * x[tail - K - 1]
                out[tail] += 0.5 * self.delta * (k[K] * x[tail - K] + self.k_end * x_end)
        out[0] = 0.0
        return out


def convolve_grid(m: Measure, values: np.ndarray, h: float):
    """``(nu * x)(t_i)`` at every node; returns ``(right_limits, left_limits)``."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    right = np.zeros(n)
    for plan in atom_plans(m, h):
        if plan.on_node:
            if plan.shift < n:
                right[plan.shift:] += plan.weight * x[: n - plan.shift]
        else:
            t_idx = np.arange(n) - plan.shift - plan.frac
            right += plan.weight * interpolate(x, 1.0, t_idx)
    if m.density is not None:
        right += DensityStencil(m.density, h, n).grid(x)
    left = right.copy()
    for plan in atom_plans(m, h):
        if plan.on_node and 0 < plan.shift < n:
            left[plan.shift] -= plan.weight * x[0]
    return right, left
