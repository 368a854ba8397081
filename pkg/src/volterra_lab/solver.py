"""The perturbed equation ``x' = nu*x + f``, ``x(0) = xi``, three ways.

* ``solve_direct``: trapezoidal time-stepping.
* ``solve_voc``: ``x = r xi + r*f`` with the numerical resolvent.
* ``reconstruct_key2``: ``x = r xi + r*f1 + f3 + r'*f3``, the
  integration-by-parts form built from the window-1 decomposition.  The
  ``r xi`` term is included so the full solution is reconstructed.

``integrated_residual`` evaluates ``x(t+theta) - x(t) - int_t^{t+theta} nu*x``,
which must equal the interval average ``F(t; theta)`` of the forcing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .forcing import Decomposition, ForcingFunction, decompose
from .measure import Grid, Measure, Trajectory, convolve_grid
from .quadrature import SNAP, cumulative, cumulative_at, interpolate, trapezoid_convolution
from .resolvent import ResolventResult, march, solve_resolvent


@dataclass(frozen=True)
class SolveConfig:
    measure: Measure
    forcing: ForcingFunction
    xi: float
    grid: Grid

    def __post_init__(self):
        if self.grid.t_last < 2:
            raise ConfigurationError("solver grids need a horizon T >= 2")

    def with_xi(self, xi):
        return SolveConfig(self.measure, self.forcing, float(xi), self.grid)

    def with_grid(self, grid):
        return SolveConfig(self.measure, self.forcing, self.xi, grid)


@dataclass(frozen=True)
class SolutionBundle:
    x_direct: Trajectory
    x_voc: Trajectory
    x_key2: Trajectory
    agreement_direct_voc: float = field(init=False)
    agreement_voc_key2: float = field(init=False)
    agreement_direct_key2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "agreement_direct_voc", self.x_direct.sup_distance(self.x_voc))
        object.__setattr__(self, "agreement_voc_key2", self.x_voc.sup_distance(self.x_key2))
        object.__setattr__(self, "agreement_direct_key2", self.x_direct.sup_distance(self.x_key2))

    def columns(self):
        return {"t": self.x_direct.times, "x_direct": self.x_direct.values,
                "x_voc": self.x_voc.values, "x_key2": self.x_key2.values}

    def summary(self):
        return {"agreement_direct_voc": self.agreement_direct_voc,
                "agreement_voc_key2": self.agreement_voc_key2,
                "agreement_direct_key2": self.agreement_direct_key2}


def solve_direct(cfg: SolveConfig) -> Trajectory:
    f_plus, f_minus = cfg.forcing.sampled(cfg.grid)
    return Trajectory(cfg.grid, march(cfg.measure, cfg.grid, cfg.xi, f_plus, f_minus))


def _check_res(cfg, res):
    if res.grid != cfg.grid:
        raise ConfigurationError(f"resolvent grid {res.grid} does not match {cfg.grid}")
    if res.measure != cfg.measure:
        raise ConfigurationError("resolvent was computed for a different measure")


def forced_voc(cfg: SolveConfig, res: ResolventResult) -> np.ndarray:
    """``(r*f)(t_i)`` by trapezoid convolution."""
    _check_res(cfg, res)
    f_plus, f_minus = cfg.forcing.sampled(cfg.grid)
    return trapezoid_convolution(res.r.values, f_plus, cfg.grid.h, b_minus=f_minus)


def solve_voc(cfg: SolveConfig, res: ResolventResult, forced=None) -> Trajectory:
    """``x(t) = r(t) xi + int_0^t r(t-s) f(s) ds``.

    ``forced`` may carry a precomputed ``r*f`` (it does not depend on xi).
    """
    _check_res(cfg, res)
    if forced is None:
        forced = forced_voc(cfg, res)
    return Trajectory(cfg.grid, cfg.xi * res.r.values + forced)


def forced_key2(dec: Decomposition, res: ResolventResult, h: float) -> np.ndarray:
    r = res.r.values
    return (trapezoid_convolution(r, dec.f1.values, h)
            + dec.f3.values
            + trapezoid_convolution(res.r_prime.values, dec.f3.values, h,
                                    a_minus=res.r_prime_left.values))


def reconstruct_key2(dec: Decomposition, res: ResolventResult, cfg: SolveConfig, forced=None) -> Trajectory:
    _check_res(cfg, res)
    if dec.f1.grid != cfg.grid:
        raise ConfigurationError("decomposition grid does not match the solve grid")
    if forced is None:
        forced = forced_key2(dec, res, cfg.grid.h)
    return Trajectory(cfg.grid, cfg.xi * res.r.values + forced)


def solve_all(cfg: SolveConfig, res: ResolventResult | None = None,
              dec: Decomposition | None = None) -> SolutionBundle:
    res = solve_resolvent(cfg.measure, cfg.grid) if res is None else res
    dec = decompose(cfg.forcing, cfg.grid) if dec is None else dec
    return SolutionBundle(solve_direct(cfg), solve_voc(cfg, res), reconstruct_key2(dec, res, cfg))


def integrated_residual(x: Trajectory, cfg: SolveConfig, theta: float) -> Trajectory:
    """``x(t+theta) - x(t) - int_t^{t+theta} (nu*x)(s) ds`` for ``t <= T - theta``."""
    if not 0 < theta <= 1:
        raise DomainError(f"theta must lie in (0, 1], got {theta}")
    grid = x.grid
    if grid.t_last < theta * (1 + SNAP):
        raise DomainError("horizon shorter than theta")
    h = grid.h
    out_grid = Grid(h, grid.t_last - theta)
    t = out_grid.times
    right, left = convolve_grid(cfg.measure, x.values, h)
    C = cumulative(right, h, left)
    u = t + theta
    integral = cumulative_at(C, right, h, u, left) - C[: out_grid.n_points]
    shifted = interpolate(x.values, h, u)
    return Trajectory(out_grid, shifted - x.values[: out_grid.n_points] - integral)
