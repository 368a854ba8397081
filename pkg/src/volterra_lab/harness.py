"""End-to-end equivalence checks between the forcing condition and solution membership.

A case fixes a kernel, a forcing function, a list of initial values and an
exponent ``p``.  ``run_case`` computes

* condition A: the interval-average scan of the forcing (norms module),
* condition B: L^p membership of the solution for every initial value,
* the identity checks (three solution routes, window-1 identity,
  integrated equation), each at ``h`` and ``h/2``.

Identity checks pass when the error at ``h`` is at rounding level or when
it shrinks by a factor in ``ORDER_BAND`` on halving ``h``.  Solution
agreement must also stay below 2.2 times the Richardson error estimate.

When condition A holds the result also records ``theta_stability`` (change of
``sup_phi`` when the theta grid is doubled) and ``split_membership`` (L^p
classification of ``f1`` and ``f3``).  These are reported, not part of the
verdict.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import config as cfgmod
from . import output
from .errors import ConfigurationError, VolterraError
from .forcing import ForcingFunction, OscGrowth, Scaled, Sum, decompose, interval_average
from .forcing import from_config as forcing_from_config
from .measure import Grid, Measure, Trajectory
from .norms import (DEFAULT_THETA_GRID, FINITE, INCONCLUSIVE, INFINITE, Thresholds,
                    classify_membership, condition_A_report, refine_theta_grid)
from .resolvent import INTEGRABLE, classify_l1, solve_resolvent
from .solver import (SolveConfig, forced_key2, forced_voc, integrated_residual,
                     solve_direct)

log = logging.getLogger(__name__)

ORDER_BAND = (3.4, 4.6)
ROUNDING_FLOOR_FACTOR = 16
RESIDUAL_THETAS = (0.1, 0.25, 0.5, 1.0)
DEFAULT_GATE_GRID = {"h": 1e-3, "T": 40.0}
OSC_RESOLUTION = 0.2
THETA_STABILITY_TOLERANCE = 0.05

PASS, FAIL = "pass", "fail"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2, "config_error": 3}


def rounding_floor(n_points: int, scale: float) -> float:
    return ROUNDING_FLOOR_FACTOR * np.finfo(float).eps * n_points * max(1.0, scale)


@dataclass
class RefinementCheck:
    label: str
    coarse: float
    fine: float
    floor: float
    tolerance: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.coarse / self.fine if self.fine > 0 else np.inf

    @property
    def at_floor(self) -> bool:
        return self.coarse <= self.floor

    @property
    def second_order(self) -> bool:
        return ORDER_BAND[0] <= self.ratio <= ORDER_BAND[1]

    @property
    def passed(self) -> bool:
        if self.at_floor:
            return True
        within = self.tolerance is None or self.coarse <= self.tolerance
        return self.second_order and within

    def as_dict(self):
        return {"label": self.label, "coarse": self.coarse, "fine": self.fine, "ratio": self.ratio,
                "floor": self.floor, "tolerance": self.tolerance, "passed": self.passed}


def _osc_terms(f: ForcingFunction):
    if isinstance(f, OscGrowth):
        yield f
    elif isinstance(f, Sum):
        for term in f.terms:
            yield from _osc_terms(term)
    elif isinstance(f, Scaled):
        yield from _osc_terms(f.inner)


@dataclass
class CaseSpec:
    name: str
    measure_cfg: dict
    forcing_cfg: dict
    xi_list: list
    p: float
    grid: Grid
    theta_grid: tuple = DEFAULT_THETA_GRID
    expected: dict = field(default_factory=lambda: {"A": FINITE, "B": FINITE})
    norms_grid: Optional[Grid] = None
    gate_grid: Grid = field(default_factory=lambda: cfgmod.grid_from_config(DEFAULT_GATE_GRID))
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        if self.expected.get("A") != self.expected.get("B"):
            raise ConfigurationError(f"case {self.name}: expected A and B must agree (they are equivalent)")
        if self.expected["A"] not in (FINITE, INFINITE):
            raise ConfigurationError(f"case {self.name}: expectations must be finite or infinite")
        if not self.xi_list:
            raise ConfigurationError(f"case {self.name}: empty xi list")
        if not self.p >= 1:
            raise ConfigurationError(f"case {self.name}: p must be >= 1")
        self.measure = cfgmod.measure_from_config(self.measure_cfg)
        self.forcing = forcing_from_config(self.forcing_cfg)
        for osc in _osc_terms(self.forcing):
            if not osc.resolution_ok(self.grid, OSC_RESOLUTION):
                raise ConfigurationError(
                    f"case {self.name}: exp(beta*T)*h must be <= {OSC_RESOLUTION} to resolve "
                    f"osc_growth(beta={osc.beta}) on h={self.grid.h}, T={self.grid.T}")

    @classmethod
    def from_config(cls, cfg: dict, overrides: dict | None = None) -> "CaseSpec":
        cfg = dict(cfg)
        overrides = overrides or {}
        try:
            grid_cfg = dict(cfg["grid"])
            for key in ("h", "T"):
                if overrides.get(key) is not None:
                    grid_cfg[key] = overrides[key]
            p = overrides.get("p") or cfg["p"]
            xi_list = cfg.get("xi_list", [cfg.get("xi", 0.0)])
            kw = {}
            if "theta_grid" in cfg:
                kw["theta_grid"] = tuple(float(t) for t in cfg["theta_grid"])
            if cfg.get("norms_grid"):
                kw["norms_grid"] = cfgmod.grid_from_config(cfg["norms_grid"])
            if cfg.get("gate_grid"):
                kw["gate_grid"] = cfgmod.grid_from_config(cfg["gate_grid"])
            if cfg.get("thresholds"):
                kw["thresholds"] = Thresholds.from_config(cfg["thresholds"])
            return cls(name=cfg.get("name", "case"), measure_cfg=cfg.get("measure", {}),
                       forcing_cfg=cfg["forcing"], xi_list=[float(x) for x in xi_list], p=float(p),
                       grid=cfgmod.grid_from_config(grid_cfg),
                       expected=dict(cfg.get("expected", {"A": FINITE, "B": FINITE})), **kw)
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad case config {cfg.get('name', '?')}: {exc}") from exc

    def to_config(self) -> dict:
        cfg = {"name": self.name, "measure": self.measure_cfg, "forcing": self.forcing_cfg,
               "xi_list": list(self.xi_list), "p": self.p, "grid": cfgmod.grid_to_config(self.grid),
               "theta_grid": list(self.theta_grid), "expected": self.expected,
               "gate_grid": cfgmod.grid_to_config(self.gate_grid),
               "thresholds": self.thresholds.as_dict()}
        if self.norms_grid is not None:
            cfg["norms_grid"] = cfgmod.grid_to_config(self.norms_grid)
        return cfg


@dataclass
class CaseResult:
    name: str
    verdict: str
    message: str = ""
    gate_verdict: str = ""
    gate_r_prime_verdict: str = ""
    observed_A: Optional[str] = None
    observed_B: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    agreement: list = field(default_factory=list)
    window_identity: Optional[RefinementCheck] = None
    integrated: list = field(default_factory=list)
    theta_stability: dict = field(default_factory=dict)
    split_membership: dict = field(default_factory=dict)
    norm_report: object = None
    artifacts: dict = field(default_factory=dict, repr=False)

    @property
    def checks(self):
        out = list(self.agreement) + list(self.integrated)
        if self.window_identity is not None:
            out.append(self.window_identity)
        return out

    @property
    def conclusive(self) -> bool:
        states = [self.observed_A, *self.observed_B.values()]
        return self.verdict != INCONCLUSIVE and all(s in (FINITE, INFINITE) for s in states)

    @property
    def equivalence_holds(self) -> bool:
        return all(b == self.observed_A for b in self.observed_B.values())

    def summary(self) -> dict:
        return output.clean({
            "name": self.name, "verdict": self.verdict, "message": self.message,
            "gate_verdict": self.gate_verdict, "gate_r_prime_verdict": self.gate_r_prime_verdict,
            "expected": self.expected,
            "observed_A": self.observed_A,
            "observed_B": {f"{k:g}": v for k, v in self.observed_B.items()},
            "agreement": [c.as_dict() for c in self.agreement],
            "window_identity": self.window_identity.as_dict() if self.window_identity else None,
            "integrated": [c.as_dict() for c in self.integrated],
            "theta_stability": self.theta_stability, "split_membership": self.split_membership,
            "norms": self.norm_report.summary() if self.norm_report else None,
        })


def _richardson(coarse: np.ndarray, fine: np.ndarray) -> float:
    """Estimated sup error of a second-order result at h from its h/2 companion."""
    return 4.0 / 3.0 * float(np.max(np.abs(coarse - fine[::2])))


class _Level:
    """Everything at one resolution that does not depend on xi."""

    def __init__(self, spec: CaseSpec, grid: Grid, keep: bool = False):
        self.grid = grid
        self.cfg = SolveConfig(spec.measure, spec.forcing, 0.0, grid)
        res = solve_resolvent(spec.measure, grid, spec.thresholds)
        dec = decompose(spec.forcing, grid)
        self.voc = forced_voc(self.cfg, res)
        self.key2 = forced_key2(dec, res, grid.h)
        self.r = res.r.values
        self.key1_residual = dec.key1_residual
        # rounding in running sums scales with the size of the sums, not of f
        self.window_scale = max(1.0, float(np.max(np.abs(dec.f1.values))), float(np.max(np.abs(dec.f3.values))))
        # the full records are large on fine grids; keep them only on request
        self.res, self.dec = (res, dec) if keep else (None, None)
        self.f1, self.f3 = dec.f1, dec.f3
        del res, dec
        self.F = {th: interval_average(spec.forcing, th, Grid(grid.h, grid.t_last - th))
                  for th in RESIDUAL_THETAS}

    def solutions(self, xi):
        cfg = self.cfg.with_xi(xi)
        r = self.r
        return {"direct": solve_direct(cfg).values, "voc": xi * r + self.voc, "key2": xi * r + self.key2}

    def integrated_errors(self, xi, x_direct):
        cfg = self.cfg.with_xi(xi)
        x = Trajectory(self.grid, x_direct)
        return {th: integrated_residual(x, cfg, th).sup_distance(F) for th, F in self.F.items()}


def run_case(spec: CaseSpec, keep: bool = False) -> CaseResult:
    """Run one equivalence case; never raises for numerical outcomes."""
    log.info("case %s: h=%g T=%g, %d initial values", spec.name, spec.grid.h, spec.grid.T, len(spec.xi_list))
    result = CaseResult(spec.name, INCONCLUSIVE, expected=dict(spec.expected))
    gate = solve_resolvent(spec.measure, spec.gate_grid, spec.thresholds)
    result.gate_verdict = gate.l1_verdict
    result.gate_r_prime_verdict = classify_l1(gate, spec.thresholds, which="r_prime")
    if gate.l1_verdict != INTEGRABLE:
        result.message = (f"resolvent of {spec.measure} classified {gate.l1_verdict} on "
                          f"h={spec.gate_grid.h}, T={spec.gate_grid.T}; the characterisation "
                          "assumes an integrable resolvent, so the case is not assessed")
        return result
    try:
        coarse = _Level(spec, spec.grid, keep=keep)
        fine = _Level(spec, spec.grid.refined())
        fine.f1 = fine.f3 = None
        n = spec.grid.n_points
        for xi in spec.xi_list:
            xs, xs2 = coarse.solutions(xi), fine.solutions(xi)
            scale = max(float(np.max(np.abs(v))) for v in xs.values())
            floor = rounding_floor(n, scale)
            est = max(_richardson(xs[k], xs2[k]) for k in xs)
            tol = 2.2 * est + floor
            for a, b in (("direct", "voc"), ("voc", "key2"), ("direct", "key2")):
                d1 = float(np.max(np.abs(xs[a] - xs[b])))
                d2 = float(np.max(np.abs(xs2[a] - xs2[b])))
                result.agreement.append(RefinementCheck(f"xi={xi:g} {a}-{b}", d1, d2, floor, tol))
            e1 = coarse.integrated_errors(xi, xs["direct"])
            e2 = fine.integrated_errors(xi, xs2["direct"])
            for th in RESIDUAL_THETAS:
                result.integrated.append(RefinementCheck(f"xi={xi:g} theta={th:g}", e1[th], e2[th], floor))
            result.observed_B[xi] = classify_membership(Trajectory(spec.grid, xs["direct"]), spec.p,
                                                        spec.thresholds)
            if keep:
                result.artifacts[f"solve_xi{xi:g}"] = {"t": spec.grid.times, "x_direct": xs["direct"],
                                                       "x_voc": xs["voc"], "x_key2": xs["key2"]}
        result.window_identity = RefinementCheck("window identity", coarse.key1_residual,
                                                 fine.key1_residual, rounding_floor(n, coarse.window_scale))
        norms_grid = spec.norms_grid or spec.grid
        report = condition_A_report(spec.forcing, spec.p, norms_grid, spec.theta_grid, spec.thresholds)
        result.norm_report = report
        result.observed_A = report.classification
        if report.classification == FINITE:
            dense = condition_A_report(spec.forcing, spec.p, norms_grid,
                                       refine_theta_grid(spec.theta_grid), spec.thresholds)
            change = abs(dense.sup_phi - report.sup_phi) / report.sup_phi if report.sup_phi > 0 else 0.0
            result.theta_stability = {"sup_phi": report.sup_phi, "sup_phi_dense": dense.sup_phi,
                             "relative_change": change, "passed": change <= THETA_STABILITY_TOLERANCE}
            # f1 is exact on any grid, so it uses the longer norms horizon when given;
            # f3 needs the resolving solver grid
            f1_traj = coarse.f1 if spec.norms_grid is None else decompose(spec.forcing, norms_grid).f1
            f1 = classify_membership(f1_traj, spec.p, spec.thresholds)
            f3 = classify_membership(coarse.f3, spec.p, spec.thresholds)
            result.split_membership = {"f1": f1, "f3": f3, "passed": f1 == FINITE and f3 == FINITE}
        if keep:
            result.artifacts["resolvent"] = coarse.res.columns()
            result.artifacts["decompose"] = coarse.dec.columns()
            result.artifacts["norms"] = {"theta": report.theta_grid, "phi_halfT": report.phi_half,
                                         "phi_T": report.phi, "ratio": report.half_horizon_ratio}
    except VolterraError as exc:
        raise type(exc)(f"case {spec.name}: {exc}") from exc

    states = [result.observed_A, *result.observed_B.values()]
    if INCONCLUSIVE in states:
        result.verdict = INCONCLUSIVE
        result.message = "a membership classification was inconclusive; increase T"
    elif (result.observed_A == spec.expected["A"]
          and all(b == spec.expected["B"] for b in result.observed_B.values())
          and all(c.passed for c in result.checks)):
        result.verdict = PASS
    else:
        result.verdict = FAIL
        failed = [c.label for c in result.checks if not c.passed]
        result.message = f"classification or identity check failed: {failed}" if failed else \
            "observed classification differs from the expected one"
    log.info("case %s: %s", spec.name, result.verdict)
    return result


def run_delta0_special(f: ForcingFunction, grid: Grid, norms_grid: Grid | None = None,
                       thresholds: Thresholds = Thresholds(),
                       theta_grid=DEFAULT_THETA_GRID) -> dict:
    """Exponential smoothing ``y = int_0^t e^{-(t-s)} f(s) ds`` versus condition A with p = 2."""
    m = Measure(((0.0, -1.0),))
    res = solve_resolvent(m, grid, thresholds)
    cfg = SolveConfig(m, f, 0.0, grid)
    y = Trajectory(grid, forced_voc(cfg, res))
    smoothed = classify_membership(y, 2, thresholds)
    report = condition_A_report(f, 2, norms_grid or grid, theta_grid, thresholds)
    return {"forcing": f.config(), "smoothed_L2": smoothed, "condition_A": report.classification,
            "agree": smoothed == report.classification and smoothed != INCONCLUSIVE,
            "sup_phi": report.sup_phi}


@dataclass
class SuiteSummary:
    results: list

    @property
    def counts(self):
        out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
        for r in self.results:
            out[r.verdict] += 1
        return out

    @property
    def exit_status(self) -> int:
        c = self.counts
        if c[FAIL]:
            return EXIT_CODES[FAIL]
        if c[INCONCLUSIVE]:
            return EXIT_CODES[INCONCLUSIVE]
        return EXIT_CODES[PASS]

    def table(self):
        rows = []
        for r in self.results:
            rows.append({"name": r.name, "verdict": r.verdict, "expected": r.expected.get("A"),
                         "observed_A": r.observed_A,
                         "observed_B": ";".join(f"{k:g}:{v}" for k, v in r.observed_B.items()),
                         "checks_passed": sum(c.passed for c in r.checks), "checks": len(r.checks)})
        return rows


def load_suite(cfg: dict, overrides: dict | None = None) -> list:
    cases = cfg.get("cases") if isinstance(cfg, dict) else cfg
    if not cases:
        raise ConfigurationError("suite is empty")
    return [CaseSpec.from_config(c, overrides) for c in cases]


def _run_and_write(spec: CaseSpec, out_dir, max_rows):
    result = run_case(spec, keep=out_dir is not None)
    if out_dir is not None:
        write_case_artifacts(result, spec, Path(out_dir) / spec.name, max_rows)
        result.artifacts = {}
    return result


def run_suite(specs: list, out_dir=None, jobs: int = 1, max_rows: int | None = 20001) -> SuiteSummary:
    if not specs:
        raise ConfigurationError("suite is empty")
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_and_write, specs, [out_dir] * len(specs), [max_rows] * len(specs)))
    else:
        results = [_run_and_write(s, out_dir, max_rows) for s in specs]
    summary = SuiteSummary(results)
    if out_dir is not None:
        out = Path(out_dir)
        output.write_json(out / "summary.json", {"counts": summary.counts,
                                                 "cases": [r.summary() for r in results]})
        rows = summary.table()
        lines = [",".join(rows[0])] + [",".join(str(v) for v in row.values()) for row in rows]
        (out / "summary.csv").write_text("\n".join(lines) + "\n")
    return summary


def write_case_artifacts(result: CaseResult, spec: CaseSpec, case_dir: Path, max_rows=None):
    case_dir = Path(case_dir)
    case_dir.mkdir(parents=True, exist_ok=True)
    output.write_json(case_dir / "config.json", spec.to_config())
    output.write_json(case_dir / "result.json", result.summary())
    art = result.artifacts
    if "resolvent" in art:
        output.write_csv(case_dir / "resolvent.csv", art["resolvent"], max_rows)
        output.line_chart(case_dir / "resolvent.svg", art["resolvent"]["t"],
                          {"r": art["resolvent"]["r"], "r'": art["resolvent"]["r_prime"]},
                          f"{spec.name}: resolvent")
    if "decompose" in art:
        d = art["decompose"]
        output.write_csv(case_dir / "decompose.csv", d, max_rows)
        output.line_chart(case_dir / "decompose.svg", d["t"], {"f1": d["f1"], "f3": d["f3"]},
                          f"{spec.name}: f1 and f3")
    if "norms" in art:
        output.write_csv(case_dir / "norms.csv", art["norms"])
    for key, cols in art.items():
        if key.startswith("solve_"):
            output.write_csv(case_dir / f"{key}.csv", cols, max_rows)
            output.line_chart(case_dir / f"{key}.svg", cols["t"],
                              {"x_direct": cols["x_direct"], "x_voc": cols["x_voc"], "x_key2": cols["x_key2"]},
                              f"{spec.name}: {key}")
