"""Command line entry point: ``volterra-lab <command> --config FILE --out DIR``.

Commands and their outputs::

    resolvent      resolvent.csv (t, r, r_prime), resolvent.json
    solve          solve.csv (t, x_direct, x_voc, x_key2), solve.json
    decompose      decompose.csv (t, f, f1, f2, f3), decompose.json
    norms          norms.csv (theta, phi_halfT, phi_T, ratio), norms.json
    theorem-check  one case: <case>/ artifacts; with --delta0 the smoothing check
    suite          all cases plus summary.json / summary.csv

Exit status: 0 pass, 1 fail, 2 inconclusive, 3 configuration error.
"""
import argparse
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from . import harness, output
from .errors import ConfigurationError, VolterraError
from .forcing import decompose
from .norms import DEFAULT_THETA_GRID, FINITE, INFINITE, Thresholds, condition_A_report
from .resolvent import INTEGRABLE, INCONCLUSIVE, solve_resolvent
from .solver import SolveConfig, solve_all


def _grid(cfg, args, key="grid"):
    g = dict(cfg.get(key) or harness.DEFAULT_GATE_GRID)
    if args.h is not None:
        g["h"] = args.h
    if args.T is not None:
        g["T"] = args.T
    return cfgmod.grid_from_config(g)


def _thresholds(cfg):
    return Thresholds.from_config(cfg.get("thresholds"))


def _report(out: Path, name: str, record: dict):
    record = output.clean(record)
    output.write_json(out / f"{name}.json", record)
    for key, value in record.items():
        print(f"{key}: {value}")


def cmd_resolvent(cfg, args):
    m = cfgmod.measure_from_config(cfg.get("measure"))
    res = solve_resolvent(m, _grid(cfg, args), _thresholds(cfg))
    output.write_csv(args.out / "resolvent.csv", res.columns())
    _report(args.out, "resolvent", res.summary())
    return {INTEGRABLE: 0, INCONCLUSIVE: 2}.get(res.l1_verdict, 1)


def cmd_solve(cfg, args):
    sc = SolveConfig(cfgmod.measure_from_config(cfg.get("measure")),
                     cfgmod.forcing_from_config(cfg["forcing"]), float(cfg.get("xi", 0.0)),
                     _grid(cfg, args))
    bundle = solve_all(sc)
    output.write_csv(args.out / "solve.csv", bundle.columns())
    _report(args.out, "solve", bundle.summary())
    return 0


def cmd_decompose(cfg, args):
    dec = decompose(cfgmod.forcing_from_config(cfg["forcing"]), _grid(cfg, args))
    output.write_csv(args.out / "decompose.csv", dec.columns())
    _report(args.out, "decompose", {"key1_residual": dec.key1_residual})
    return 0


def cmd_norms(cfg, args):
    p = args.p or cfg.get("p", 2.0)
    thetas = tuple(cfg.get("theta_grid", DEFAULT_THETA_GRID))
    report = condition_A_report(cfgmod.forcing_from_config(cfg["forcing"]), float(p),
                                _grid(cfg, args), thetas, _thresholds(cfg))
    output.write_csv(args.out / "norms.csv", {"theta": report.theta_grid, "phi_halfT": report.phi_half,
                                             "phi_T": report.phi, "ratio": report.half_horizon_ratio})
    _report(args.out, "norms", report.summary())
    return 0 if report.classification in (FINITE, INFINITE) else 2


def _pick_case(cfg, name):
    cases = cfg.get("cases")
    if cases is None:
        return cfg
    if name is None:
        if len(cases) != 1:
            raise ConfigurationError(f"config holds {len(cases)} cases; choose one with --case")
        return cases[0]
    for c in cases:
        if c.get("name") == name:
            return c
    raise ConfigurationError(f"no case named {name!r}")


def cmd_theorem_check(cfg, args):
    if args.delta0:
        g = _grid(cfg, args)
        ng = cfgmod.grid_from_config(cfg["norms_grid"]) if cfg.get("norms_grid") else None
        rep = harness.run_delta0_special(cfgmod.forcing_from_config(cfg["forcing"]), g, ng,
                                         _thresholds(cfg))
        _report(args.out, "delta0", rep)
        return 0 if rep["agree"] else 1
    spec = harness.CaseSpec.from_config(_pick_case(cfg, args.case), _overrides(args))
    result = harness.run_case(spec, keep=True)
    harness.write_case_artifacts(result, spec, args.out / spec.name, max_rows=args.max_rows)
    print(f"{spec.name}: {result.verdict} (A={result.observed_A}, B={result.observed_B}) {result.message}")
    return harness.EXIT_CODES[result.verdict]


def cmd_suite(cfg, args):
    specs = harness.load_suite(cfg, _overrides(args))
    summary = harness.run_suite(specs, args.out, jobs=args.jobs, max_rows=args.max_rows)
    for row in summary.table():
        print(f"{row['name']:32s} {row['verdict']:13s} A={row['observed_A']} B={row['observed_B']}")
    print("counts:", summary.counts)
    return summary.exit_status


def _overrides(args):
    return {"h": args.h, "T": args.T, "p": args.p}


COMMANDS = {"resolvent": cmd_resolvent, "solve": cmd_solve, "decompose": cmd_decompose,
            "norms": cmd_norms, "theorem-check": cmd_theorem_check, "suite": cmd_suite}


def build_parser():
    parser = argparse.ArgumentParser(prog="volterra-lab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file (suite defaults to the shipped suite)")
    parser.add_argument("--out", default="out", type=Path, help="output directory")
    parser.add_argument("--h", type=float, help="override the step size")
    parser.add_argument("--T", type=float, help="override the horizon")
    parser.add_argument("--p", type=float, help="override the exponent")
    parser.add_argument("--case", help="case name when the config holds several")
    parser.add_argument("--delta0", action="store_true", help="theorem-check: exponential smoothing check")
    parser.add_argument("--jobs", type=int, default=1, help="suite: parallel worker processes")
    parser.add_argument("--max-rows", type=int, default=20001, help="thin long CSVs to this many rows")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            cfg = cfgmod.load(args.config)
        elif args.command == "suite":
            cfg = cfgmod.builtin("suite")
        else:
            raise ConfigurationError(f"{args.command} needs --config")
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args)
    except (VolterraError, KeyError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return harness.EXIT_CODES["config_error"]


if __name__ == "__main__":
    sys.exit(main())
