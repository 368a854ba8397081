"""Differential resolvent of a measure and the shared trapezoidal marcher.

The resolvent solves ``r'(t) = (nu * r)(t)``, ``r(0) = 1``.  Both the
resolvent and the forced equation are advanced with

    x_{i+1} = x_i + h/2 [(nu*x)(t_i+) + (nu*x)(t_{i+1}-)] + h/2 [f(t_i+) + f(t_{i+1}-)]

where the contribution of ``x_{i+1}`` to ``(nu*x)(t_{i+1})`` (atom at zero,
first density node, atoms closer than ``h``) is moved to the left-hand side
and solved for in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError
from .measure import DensityStencil, Grid, Measure, Trajectory, atom_plans, convolve_grid
from .norms import Thresholds, peak_slope, relative_increment, truncated_lp

INTEGRABLE = "integrable"
SUSPECT = "suspect_nonintegrable"
INCONCLUSIVE = "inconclusive"

# |1 - h/2 * c| below this is treated as a singular step
_DEGENERATE = 1e-12


def _implicit_coefficient(plans, stencil) -> float:
    c = 0.0
    for plan in plans:
        if plan.shift == 0:
            c += plan.weight * (1.0 if plan.on_node else 1.0 - plan.frac)
    if stencil is not None:
        c += stencil.self_weight
    return c


def _far_atoms(x, plans, idx, side):
    """Atom terms at nodes ``idx`` from atoms at least one step away."""
    out = np.zeros(len(idx))
    for plan in plans:
        if plan.on_node:
            src = idx - plan.shift
            ok = src >= 0
            if side == "left":
                ok &= src > 0
            out[ok] += plan.weight * x[src[ok]]
        else:
            u = idx - plan.shift - plan.frac
            ok = u >= 0
            lo = np.floor(u[ok]).astype(np.int64)
            fr = u[ok] - lo
            out[ok] += plan.weight * ((1.0 - fr) * x[lo] + fr * x[lo + 1])
    return out


def march(m: Measure, grid: Grid, xi: float, f_plus=None, f_minus=None) -> np.ndarray:
    """Trapezoidal time-stepping of ``x' = nu*x + f``, ``x(0) = xi``.

    ``f_plus``/``f_minus`` are right/left limits of the forcing at the
    nodes (None for the unforced equation).
    """
    h, n = grid.h, grid.n_points
    plans = atom_plans(m, h)
    stencil = DensityStencil(m.density, h, n) if m.density is not None else None
    c_imp = _implicit_coefficient(plans, stencil)
    D = 1.0 - 0.5 * h * c_imp
    if abs(D) < _DEGENERATE:
        raise ConfigurationError(
            f"degenerate step: 1 - (h/2)*{c_imp:g} = 0 for h={h}; use a smaller h")
    if f_plus is None:
        finc = np.zeros(n - 1)
    else:
        f_minus = f_plus if f_minus is None else f_minus
        finc = 0.5 * h * (np.asarray(f_plus)[:-1] + np.asarray(f_minus)[1:])
    x = np.zeros(n)
    x[0] = xi
    fast = stencil is None and all(p.shift >= 1 or p.on_node for p in plans)
    if fast:
        _march_atoms(x, plans, h, c_imp, D, finc)
    else:
        _march_general(x, plans, stencil, h, c_imp, D, finc)
    return x


def _march_atoms(x, plans, h, c_imp, D, finc):
    # atoms at zero are implicit; delayed atoms only read values at least
    # `block` steps back, so each block is a first-order linear recurrence
    n = len(x)
    far = [p for p in plans if p.shift >= 1]
    block = min((p.shift for p in far), default=n)
    c = (1.0 + 0.5 * h * c_imp) / D
    b = 0
    while b < n - 1:
        e = min(b + block, n - 1)
        g = finc[b:e].copy()
        if far:
            g += 0.5 * h * (_far_atoms(x, far, np.arange(b, e), "right")
                            + _far_atoms(x, far, np.arange(b + 1, e + 1), "left"))
        g /= D
        x[b + 1: e + 1] = lfilter([1.0], [1.0, -c], g, zi=[c * x[b]])[0]
        b = e


def _march_general(x, plans, stencil, h, c_imp, D, finc):
    n = len(x)
    jumps = {}
    for p in plans:
        if p.on_node and p.shift > 0:
            jumps[p.shift] = jumps.get(p.shift, 0.0) + p.weight

    def node(i):
        # value at node i with x[i] still zero, i.e. without the implicit part
        val = 0.0
        for p in plans:
            if p.on_node:
                if p.shift == 0 or i <= p.shift:
                    continue
                val += p.weight * x[i - p.shift]
            else:
                u = i - p.shift - p.frac
                if u >= 0:
                    lo = int(np.floor(u))
                    fr = u - lo
                    val += p.weight * ((1.0 - fr) * x[lo] + fr * x[lo + 1])
        if stencil is not None:
            val += stencil.node(i, x)
        return val

    conv = sum(p.weight for p in plans if p.shift == 0 and p.on_node) * x[0]
    half_h = 0.5 * h
    for i in range(n - 1):
        left = node(i + 1)
        x[i + 1] = (x[i] + half_h * (conv + left) + finc[i]) / D
        conv = left + c_imp * x[i + 1] + jumps.get(i + 1, 0.0) * x[0]


@dataclass(frozen=True)
class ResolventResult:
    r: Trajectory
    r_prime: Trajectory
    r_prime_left: Trajectory
    l1_truncated: float
    l1_tail_rate: Optional[float]
    l1_verdict: str
    measure: Measure

    @property
    def grid(self) -> Grid:
        return self.r.grid

    def columns(self):
        return {"t": self.r.times, "r": self.r.values, "r_prime": self.r_prime.values}

    def summary(self):
        return {"measure": str(self.measure), "h": self.grid.h, "T": self.grid.T,
                "l1_truncated": self.l1_truncated, "l1_tail_rate": self.l1_tail_rate,
                "l1_verdict": self.l1_verdict}


def l1_diagnostics(values: Trajectory, thresholds: Thresholds = Thresholds()):
    """Return ``(l1_T, tail_rate, verdict)`` for a sampled function."""
    full = truncated_lp(values, 1)
    if values.grid.t_last < 10:
        return full, None, INCONCLUSIVE
    half = truncated_lp(values, 1, values.grid.t_last / 2)
    inc = relative_increment(full, half)
    slope = peak_slope(values, thresholds.windows)
    rate = None if np.isnan(slope) else float(-slope)
    if inc < thresholds.tau_tail and slope < -thresholds.slope_tol:
        verdict = INTEGRABLE
    elif slope >= -thresholds.slope_tol or inc > thresholds.tau_blow:
        verdict = SUSPECT
    else:
        verdict = INCONCLUSIVE
    return full, rate, verdict


def classify_l1(res: ResolventResult, thresholds: Thresholds = Thresholds(), which: str = "r") -> str:
    """Numerical surrogate for ``r in L^1(R_+)`` (needs ``T >= 10``)."""
    traj = {"r": res.r, "r_prime": res.r_prime}[which]
    return l1_diagnostics(traj, thresholds)[2]


def solve_resolvent(m: Measure, grid: Grid, thresholds: Thresholds = Thresholds()) -> ResolventResult:
    r = march(m, grid, 1.0)
    right, left = convolve_grid(m, r, grid.h)
    r_traj = Trajectory(grid, r)
    l1, rate, verdict = l1_diagnostics(r_traj, thresholds)
    return ResolventResult(r_traj, Trajectory(grid, right), Trajectory(grid, left),
                           l1, rate, verdict, m)
