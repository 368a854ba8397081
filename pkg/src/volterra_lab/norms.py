"""Truncated half-line L^p norms and finite/infinite membership surrogates.

Membership of ``L^p(R_+)`` cannot be decided from samples on ``[0, T]``.
Every classifier here compares the truncated norm on ``[0, T/2]`` with the
one on ``[0, T]`` and looks at whether the peaks of ``|x|`` on the final
third still decay.  The calibration of the thresholds is documented in the
README; ``"inconclusive"`` is always a legitimate answer.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .forcing import ForcingFunction, interval_average
from .measure import Grid, Trajectory
from .quadrature import trapezoid

FINITE, INFINITE, INCONCLUSIVE = "finite", "infinite", "inconclusive"

DEFAULT_THETA_GRID = tuple(k / 16 for k in range(1, 17))


@dataclass(frozen=True)
class Thresholds:
    """Classification thresholds.

    tau_growth: largest relative increment of the truncated norm between
        T/2 and T still read as convergence.
    tau_blow: relative increment above which the norm is read as divergent.
        Calibrated on ``1/(1+t)`` with ``p = 1``, whose increment at T = 40 is
        ``ln 41 / ln 21 - 1 = 0.22``.
    tau_tail: increment bound used by the resolvent L^1 diagnostic.
    slope_tol: peaks decaying slower than ``exp(-slope_tol * t)`` count as
        non-decaying.
    windows: number of windows on the final third used for the peak fit.
    """

    tau_growth: float = 1e-2
    tau_blow: float = 0.2
    tau_tail: float = 1e-3
    slope_tol: float = 1e-3
    windows: int = 8

    def __post_init__(self):
        if not 0 < self.tau_growth < self.tau_blow:
            raise ConfigurationError("thresholds need 0 < tau_growth < tau_blow")
        if self.tau_tail <= 0 or self.slope_tol < 0 or self.windows < 2:
            raise ConfigurationError("invalid tail thresholds")

    @classmethod
    def from_config(cls, cfg):
        return cls(**(cfg or {}))

    def as_dict(self):
        return asdict(self)


def truncated_lp(x: Trajectory, p: float, upto: float | None = None) -> float:
    """``int_0^T |x(t)|^p dt`` by composite trapezoid (``T`` = ``upto`` if given)."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return trapezoid(np.abs(x.values) ** p, x.grid.h, upto)


def relative_increment(full: float, half: float) -> float:
    if half > 0:
        return (full - half) / half
    return 0.0 if full == 0 else np.inf


def peak_slope(x: Trajectory, windows: int = 8) -> float:
    """Slope of a log-linear fit to window maxima of |x| on the final third."""
    t = x.times
    v = np.abs(x.values)
    start = 2.0 * x.grid.t_last / 3.0
    edges = np.linspace(start, x.grid.t_last, windows + 1)
    centres, peaks = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (t >= lo) & (t <= hi)
        if np.any(sel):
            centres.append(0.5 * (lo + hi))
            peaks.append(v[sel].max())
    centres, peaks = np.array(centres), np.array(peaks)
    pos = peaks > 0
    if len(peaks) == 0 or not pos[-1]:
        # vanished by the end of the horizon
        return -np.inf
    if pos.sum() < 2:
        return np.nan
    return float(np.polyfit(centres[pos], np.log(peaks[pos]), 1)[0])


def tail_diagnostics(x: Trajectory, p: float, windows: int = 8):
    """Return ``(norm_T, norm_half, increment, slope)`` for the p-th power."""
    full = truncated_lp(x, p)
    half = truncated_lp(x, p, x.grid.t_last / 2)
    return full, half, relative_increment(full, half), peak_slope(x, windows)


def classify_membership(x: Trajectory, p: float, thresholds: Thresholds = Thresholds()) -> str:
    """Finite-horizon surrogate for ``x in L^p(R_+)``."""
    if x.grid.t_last < 4:
        raise DomainError("membership classification needs a horizon T >= 4")
    full, _, inc, slope = tail_diagnostics(x, p, thresholds.windows)
    if full == 0:
        return FINITE
    decaying = slope < -thresholds.slope_tol
    if inc <= thresholds.tau_growth and decaying:
        return FINITE
    if inc > thresholds.tau_blow or (not decaying and inc > thresholds.tau_growth):
        return INFINITE
    return INCONCLUSIVE


@dataclass
class NormReport:
    p: float
    theta_grid: list
    phi: list
    phi_half: list
    sup_phi: float
    half_horizon_ratio: list
    classification: str
    thresholds: Thresholds = field(default_factory=Thresholds)

    def rows(self):
        return list(zip(self.theta_grid, self.phi_half, self.phi, self.half_horizon_ratio))

    def summary(self):
        return {"p": self.p, "sup_phi": self.sup_phi, "classification": self.classification}


def _ratio(full, half):
    if half > 0:
        return full / half
    return 1.0 if full == 0 else np.inf


def condition_A_report(f: ForcingFunction, p: float, grid: Grid,
                       theta_grid: Sequence[float] = DEFAULT_THETA_GRID,
                       thresholds: Thresholds = Thresholds(),
                       method: str = "auto") -> NormReport:
    """Scan ``phi(theta) = int_0^{T-theta} |F(t;theta)|^p dt`` over a theta grid."""
    theta_grid = [float(th) for th in theta_grid]
    if not theta_grid:
        raise ConfigurationError("theta grid is empty")
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if grid.t_last < 4:
        raise ConfigurationError("condition A scan needs a horizon T >= 4")
    phi, phi_half, ratios = [], [], []
    for theta in theta_grid:
        sub = grid.truncated(grid.T - theta)
        F = interval_average(f, theta, sub, method=method)
        full = truncated_lp(F, p)
        half = truncated_lp(F, p, sub.t_last / 2)
        phi.append(full)
        phi_half.append(half)
        ratios.append(_ratio(full, half))
    if all(r <= 1 + thresholds.tau_growth for r in ratios):
        cls = FINITE
    elif any(r > 1 + thresholds.tau_blow for r in ratios):
        cls = INFINITE
    else:
        cls = INCONCLUSIVE
    return NormReport(p, theta_grid, phi, phi_half, float(max(phi)), ratios, cls, thresholds)


def refine_theta_grid(theta_grid: Sequence[float]) -> list:
    """Double the density of a theta grid by inserting midpoints (and theta/2 below the first)."""
    pts = sorted(set(float(t) for t in theta_grid))
    out = [pts[0] / 2]
    prev = 0.0
    for th in pts:
        if prev > 0:
            out.append(0.5 * (prev + th))
        out.append(th)
        prev = th
    return out
