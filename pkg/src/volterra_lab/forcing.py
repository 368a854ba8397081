"""Forcing functions, interval averages and the window-1 decomposition.

Every forcing function is defined for all real ``t`` and vanishes for
``t < 0``.  Kinds with a closed-form antiderivative expose it through
``antiderivative``; interval averages and the window integral ``f1`` use it
when available and fall back to composite trapezoid otherwise.

Functions with jumps (``step_train``) are right-continuous; ``left_limit``
returns the value approached from the left, which the time-stepping and
trapezoid rules use at the right end of each panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigurationError, DomainError
from .measure import Grid, Trajectory
from .quadrature import SNAP, cumulative, cumulative_at, interpolate


class ForcingFunction:
    """Base class: subclasses implement ``_eval`` for ``t >= 0``."""

    kind = "abstract"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t >= 0
        if np.any(pos):
            out[pos] = self._eval(t[pos])
        return out if out.ndim else float(out)

    eval = __call__

    def left_limit(self, t):
        """``f(t-)``; equal to ``f(t)`` for continuous kinds (and 0 at t <= 0)."""
        t = np.asarray(t, dtype=float)
        out = np.where(t > 0, self(t), 0.0)
        return out if out.ndim else float(out)

    def antiderivative(self, t) -> Optional[np.ndarray]:
        """``int_0^t f(s) ds`` in closed form, or None if unavailable."""
        if not self.has_antiderivative:
            return None
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        if np.any(pos):
            out[pos] = self._antiderivative(t[pos])
        return out if out.ndim else float(out)

    has_antiderivative = True

    def _eval(self, t):
        raise NotImplementedError

    def _antiderivative(self, t):
        raise NotImplementedError

    def sampled(self, grid: Grid):
        """Right and left limits at the grid nodes."""
        t = grid.times
        return self(t), self.left_limit(t)

    def config(self) -> dict:
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, other))

    def __rmul__(self, c):
        return Scaled(float(c), self)

    def __repr__(self):
        return f"{type(self).__name__}({self.config()})"


@dataclass(frozen=True, repr=False)
class Constant(ForcingFunction):
    c: float = 0.0
    kind = "constant"

    def _eval(self, t):
        return np.full_like(t, self.c)

    def _antiderivative(self, t):
        return self.c * t

    def config(self):
        return {"kind": self.kind, "c": self.c}


@lru_cache(maxsize=32)
def _osc_table(a: float, u_switch: float, panel: float):
    nodes, weights = leggauss(12)
    edges = np.arange(1.0, u_switch + 0.5 * panel, panel)
    lo, hi = edges[:-1], edges[1:]
    cum = np.concatenate([[0.0], np.cumsum(_gl_segment(a, lo, hi, nodes, weights))])
    tail_end = _osc_tail(a, np.array([edges[-1]]))[0]
    s_inf = cum[-1] + tail_end.imag
    return edges, cum, s_inf, nodes, weights


def _gl_segment(a, lo, hi, nodes, weights):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    u = mid[:, None] + half[:, None] * nodes[None, :]
    return (u ** (a - 1.0) * np.sin(u)) @ weights * half


def _osc_tail(a, U, terms=34, tol=1e-17):
    # int_U^inf u^(a-1) e^{iu} du = i e^{iU} U^(a-1) sum_k c_k (i/U)^k
    # with c_k = (a-1)(a-2)...(a-k); larger U needs fewer terms
    coefs = np.cumprod(np.concatenate([[1.0], a - 1.0 - np.arange(terms - 1)]))
    out = np.empty(U.shape, dtype=complex)
    lo = 40.0
    bucket = U < 4 * lo
    rest = ~bucket
    while True:
        if np.any(bucket):
            umin = U[bucket].min()
            with np.errstate(divide="ignore"):
                log_size = np.log(np.abs(coefs)) - np.arange(terms) * np.log(umin)
            k = min(terms, int(np.argmax(log_size < np.log(tol))) or terms)
            z = 1j / U[bucket]
            acc = np.full(z.shape, coefs[k - 1], dtype=complex)
            for c in coefs[k - 2::-1]:
                acc = acc * z + c
            Ub = U[bucket]
            out[bucket] = 1j * np.exp(1j * Ub) * Ub ** (a - 1.0) * acc
        if not np.any(rest):
            return out
        lo *= 4
        bucket = rest & (U < 4 * lo)
        rest &= ~bucket


@dataclass(frozen=True, repr=False)
class OscGrowth(ForcingFunction):
    """``exp(alpha t) sin(exp(beta t))`` with ``0 < alpha < beta``.

    The antiderivative substitutes ``u = exp(beta s)``:
    ``int_0^t f = (1/beta) int_1^U u^(alpha/beta - 1) sin(u) du``.
    Below ``U = 40`` the u-integral is tabulated by Gauss-Legendre panels;
    above it the tail ``int_U^inf`` is summed from its asymptotic series,
    which is accurate to rounding for ``U >= 40``.
    """

    alpha: float = 1.0
    beta: float = 2.0
    kind = "osc_growth"
    U_SWITCH = 40.0
    PANEL = 0.25

    def __post_init__(self):
        if not 0 < self.alpha < self.beta:
            raise ConfigurationError(f"osc_growth needs 0 < alpha < beta, got {self.alpha}, {self.beta}")

    def _eval(self, t):
        return np.exp(self.alpha * t) * np.sin(np.exp(self.beta * t))

    def _antiderivative(self, t):
        a = self.alpha / self.beta
        edges, cum, s_inf, nodes, weights = _osc_table(a, self.U_SWITCH, self.PANEL)
        U = np.exp(self.beta * t)
        out = np.empty_like(U)
        low = U < edges[-1]
        if np.any(low):
            k = np.clip(((U[low] - 1.0) // self.PANEL).astype(np.int64), 0, len(edges) - 2)
            out[low] = cum[k] + _gl_segment(a, edges[k], U[low], nodes, weights)
        if np.any(~low):
            out[~low] = s_inf - _osc_tail(a, U[~low]).imag
        return out / self.beta

    def resolution_ok(self, grid: Grid, limit: float = 0.2) -> bool:
        """Whether ``exp(beta T) h <= limit`` (oscillation resolved by the grid)."""
        return math.exp(self.beta * grid.t_last) * grid.h <= limit

    def config(self):
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True, repr=False)
class LpMember(ForcingFunction):
    """Named decaying functions.

    ``exp``:        amplitude * exp(-rate t)
    ``reciprocal``: amplitude / (1 + t)**power
    """

    name: str = "exp"
    amplitude: float = 1.0
    rate: float = 1.0
    power: float = 1.0
    kind = "lp_member"
    NAMES = ("exp", "reciprocal")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ConfigurationError(f"unknown lp_member {self.name!r}; known: {self.NAMES}")
        if self.name == "exp" and self.rate <= 0:
            raise ConfigurationError("exp rate must be positive")
        if self.name == "reciprocal" and self.power <= 0:
            raise ConfigurationError("reciprocal power must be positive")

    def _eval(self, t):
        if self.name == "exp":
            return self.amplitude * np.exp(-self.rate * t)
        return self.amplitude / (1.0 + t) ** self.power

    def _antiderivative(self, t):
        A = self.amplitude
        if self.name == "exp":
            return A * -np.expm1(-self.rate * t) / self.rate
        if self.power == 1.0:
            return A * np.log1p(t)
        q = 1.0 - self.power
        return A * np.expm1(q * np.log1p(t)) / q

    def config(self):
        cfg = {"kind": self.kind, "name": self.name, "amplitude": self.amplitude}
        cfg.update({"rate": self.rate} if self.name == "exp" else {"power": self.power})
        return cfg


@dataclass(frozen=True, repr=False)
class Sine(ForcingFunction):
    """``amplitude * sin(2 pi frequency t)``."""

    amplitude: float = 1.0
    frequency: float = 1.0
    kind = "sine"

    def _eval(self, t):
        return self.amplitude * np.sin(2 * np.pi * self.frequency * t)

    def _antiderivative(self, t):
        w = 2 * np.pi * self.frequency
        return self.amplitude * 2 * np.sin(0.5 * w * t) ** 2 / w

    def config(self):
        return {"kind": self.kind, "amplitude": self.amplitude, "frequency": self.frequency}


@dataclass(frozen=True, repr=False)
class StepTrain(ForcingFunction):
    """Step ``k`` has height ``amplitudes[k]`` on ``[k*period, k*period + widths[k])``."""

    amplitudes: tuple = ()
    widths: tuple = ()
    period: float = 1.0
    kind = "step_train"

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        widths = tuple(float(w) for w in self.widths)
        if len(amps) != len(widths):
            raise ConfigurationError("step_train needs as many widths as amplitudes")
        if self.period <= 0 or any(not 0 < w <= self.period for w in widths):
            raise ConfigurationError("step widths must lie in (0, period]")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "widths", widths)

    def _locate(self, t):
        u = t / self.period
        k = np.floor(u + SNAP)
        pos = (u - k) * self.period
        pos = np.where(np.abs(pos) < SNAP * np.maximum(1.0, t), 0.0, pos)
        return k.astype(np.int64), pos

    def _height(self, k):
        amps = np.asarray(self.amplitudes + (0.0,))
        return amps[np.clip(k, 0, len(self.amplitudes))] * (k < len(self.amplitudes))

    def _width(self, k):
        widths = np.asarray(self.widths + (0.0,))
        return widths[np.clip(k, 0, len(self.widths))] * (k < len(self.widths))

    def _eval(self, t):
        k, pos = self._locate(t)
        w = self._width(k)
        inside = pos < w - SNAP * np.maximum(1.0, t)
        return np.where(inside, self._height(k), 0.0)

    def left_limit(self, t):
        t = np.asarray(t, dtype=float)
        k, pos = self._locate(t)
        # at a period boundary the left limit belongs to the previous step
        at_start = pos == 0.0
        k = np.where(at_start, k - 1, k)
        pos = np.where(at_start, self.period, pos)
        w = self._width(k)
        inside = (pos <= w + SNAP * np.maximum(1.0, t)) & (k >= 0)
        out = np.where(inside & (t > 0), self._height(k), 0.0)
        return out if out.ndim else float(out)

    def _antiderivative(self, t):
        k, pos = self._locate(t)
        full = np.concatenate([[0.0], np.cumsum(np.asarray(self.amplitudes) * np.asarray(self.widths))])
        kc = np.clip(k, 0, len(self.amplitudes))
        return full[kc] + self._height(k) * np.minimum(pos, self._width(k))

    def config(self):
        return {"kind": self.kind, "amplitudes": list(self.amplitudes),
                "widths": list(self.widths), "period": self.period}


@dataclass(frozen=True, eq=False, repr=False)
class Tabulated(ForcingFunction):
    """Samples on a grid, linearly interpolated; undefined beyond the horizon."""

    trajectory: Trajectory = None
    kind = "tabulated"
    has_antiderivative = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.trajectory.grid.t_last * (1 + SNAP) + SNAP):
            raise DomainError(f"tabulated forcing evaluated beyond its horizon {self.trajectory.grid.t_last}")
        out = interpolate(self.trajectory.values, self.trajectory.grid.h, t)
        return out if out.ndim else float(out)

    eval = __call__

    def config(self):
        g = self.trajectory.grid
        return {"kind": self.kind, "h": g.h, "T": g.T, "values": self.trajectory.values.tolist()}


@dataclass(frozen=True, repr=False)
class Sum(ForcingFunction):
    terms: tuple = ()
    kind = "sum"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term(t)
        return out if out.ndim else float(out)

    eval = __call__

    def left_limit(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term.left_limit(t)
        return out if out.ndim else float(out)

    @property
    def has_antiderivative(self):
        return all(term.has_antiderivative for term in self.terms)

    def antiderivative(self, t):
        if not self.has_antiderivative:
            return None
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term.antiderivative(t)
        return out if out.ndim else float(out)

    def config(self):
        return {"kind": self.kind, "terms": [term.config() for term in self.terms]}


@dataclass(frozen=True, repr=False)
class Scaled(ForcingFunction):
    c: float = 1.0
    inner: ForcingFunction = None
    kind = "scaled"

    def __call__(self, t):
        return self.c * np.asarray(self.inner(t))

    eval = __call__

    def left_limit(self, t):
        return self.c * np.asarray(self.inner.left_limit(t))

    @property
    def has_antiderivative(self):
        return self.inner.has_antiderivative

    def antiderivative(self, t):
        inner = self.inner.antiderivative(t)
        return None if inner is None else self.c * inner

    def config(self):
        return {"kind": self.kind, "c": self.c, "inner": self.inner.config()}


def from_config(cfg: dict) -> ForcingFunction:
    """Build a forcing function from its config record."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    try:
        if kind == "constant":
            return Constant(float(cfg.get("c", 0.0)))
        if kind == "osc_growth":
            return OscGrowth(float(cfg["alpha"]), float(cfg["beta"]))
        if kind == "lp_member":
            return LpMember(**cfg)
        if kind == "sine":
            return Sine(**cfg)
        if kind == "step_train":
            return StepTrain(tuple(cfg["amplitudes"]), tuple(cfg["widths"]), float(cfg.get("period", 1.0)))
        if kind == "tabulated":
            grid = Grid(float(cfg["h"]), float(cfg["T"]))
            return Tabulated(Trajectory(grid, np.asarray(cfg["values"], dtype=float)))
        if kind == "sum":
            return Sum(tuple(from_config(term) for term in cfg["terms"]))
        if kind == "scaled":
            return Scaled(float(cfg["c"]), from_config(cfg["inner"]))
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad {kind} forcing config: {exc}") from exc
    raise ConfigurationError(f"unknown forcing kind {kind!r}")


# -- interval averages ----------------------------------------------------------

def window_integral(f: ForcingFunction, lo, hi, h: float, method: str = "auto"):
    """``int_lo^hi f(s) ds`` for arrays ``lo <= hi`` (zero extension below 0).

    The quadrature path samples ``f`` on a uniform mesh of step ``h`` from
    zero and integrates by trapezoid with one-sided limits at panel ends.
    """
    lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
    hi = np.maximum(np.asarray(hi, dtype=float), 0.0)
    if method not in ("auto", "exact", "quadrature"):
        raise ConfigurationError(f"unknown integration method {method!r}")
    if method != "quadrature" and f.has_antiderivative:
        return f.antiderivative(hi) - f.antiderivative(lo)
    if method == "exact":
        raise ConfigurationError(f"{f!r} has no closed-form antiderivative")
    n = int(math.floor(np.max(hi) / h + SNAP)) + 2
    s = np.arange(n) * h
    plus, minus = f(s), f.left_limit(s)
    C = cumulative(plus, h, minus)
    return cumulative_at(C, plus, h, hi, minus) - cumulative_at(C, plus, h, lo, minus)


def interval_average(f: ForcingFunction, theta: float, grid: Grid, method: str = "auto") -> Trajectory:
    """``F(t_i; theta) = int_{t_i}^{t_i + theta} f(s) ds`` on every node."""
    if not 0 < theta <= 1:
        raise DomainError(f"theta must lie in (0, 1], got {theta}")
    t = grid.times
    shift = theta / grid.h
    if method != "quadrature" and f.has_antiderivative and abs(shift - round(shift)) < SNAP:
        # on-grid window: both ends are nodes of one extended grid
        k = int(round(shift))
        G = f.antiderivative(np.arange(grid.n_points + k) * grid.h)
        return Trajectory(grid, G[k:] - G[: grid.n_points])
    sub = min(grid.h, theta / 8)
    # substep divides h so the quadrature mesh contains every node
    sub = grid.h / math.ceil(grid.h / sub - SNAP)
    return Trajectory(grid, window_integral(f, t, t + theta, sub, method))


# -- decomposition f = f1 + f2 --------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    f: Trajectory
    f1: Trajectory
    f2: Trajectory
    f3: Trajectory
    key1_residual: float
    key1_rhs: Trajectory

    def columns(self):
        return {"t": self.f.times, "f": self.f.values, "f1": self.f1.values,
                "f2": self.f2.values, "f3": self.f3.values}


def key1_double_integral(f: ForcingFunction, grid: Grid) -> np.ndarray:
    """``int_0^1 int_{t+v-1}^t f(u) du dv`` at every node, by nested trapezoid.

    Inner integrals come from the running trapezoid ``G`` of ``f`` on the
    grid; the outer v-integral with step ``h`` is the running trapezoid of
    ``G`` over the window ``[t - 1, t]``.
    """
    h = grid.h
    plus, minus = f.sampled(grid)
    G = cumulative(plus, h, minus)
    H = cumulative(G, h)
    t = grid.times
    back = np.maximum(t - 1.0, 0.0)
    return G - (H - cumulative_at(H, G, h, back))


def decompose(f: ForcingFunction, grid: Grid, method: str = "auto") -> Decomposition:
    """Split ``f = f1 + f2`` with ``f1(t) = int_{t-1}^t f`` and ``f3 = int_0^t f2``."""
    if grid.t_last < 2:
        raise ConfigurationError("decomposition needs a horizon T >= 2")
    h = grid.h
    t = grid.times
    plus, minus = f.sampled(grid)
    f1 = window_integral(f, t - 1.0, t, h, method)
    f2_plus = plus - f1
    f3 = cumulative(f2_plus, h, minus - f1)
    rhs = key1_double_integral(f, grid)
    sel = t >= 1.0 - SNAP
    residual = float(np.max(np.abs(f3[sel] - rhs[sel]))) if np.any(sel) else 0.0
    return Decomposition(Trajectory(grid, plus), Trajectory(grid, f1), Trajectory(grid, f2_plus),
                         Trajectory(grid, f3), residual, Trajectory(grid, rhs))
