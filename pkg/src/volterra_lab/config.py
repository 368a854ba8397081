"""JSON-compatible config records for measures, grids and forcing functions.

Measure::

    {"atoms": [{"location": 0.0, "weight": -1.0}],
     "density": {"name": "exp_decay", "rate": 1.0, "scale": -1.0, "s_max": 40.0}}

Grid::

    {"h": 0.001, "T": 20.0}

Forcing: ``{"kind": ..., <parameters>}``, see :func:`forcing.from_config`.
"""
import json
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError
from .forcing import from_config as forcing_from_config  # noqa: F401  (re-export)
from .measure import DENSITIES, Grid, Measure


def measure_from_config(cfg) -> Measure:
    cfg = cfg or {}
    try:
        atoms = [(float(a["location"]), float(a["weight"])) for a in cfg.get("atoms", [])]
        density = None
        if cfg.get("density"):
            d = dict(cfg["density"])
            name = d.pop("name")
            if name not in DENSITIES:
                raise ConfigurationError(f"unknown density {name!r}; known: {sorted(DENSITIES)}")
            density = DENSITIES[name](d)
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad measure config: {exc}") from exc
    return Measure(tuple(atoms), density)


def measure_to_config(m: Measure) -> dict:
    cfg = {"atoms": [{"location": loc, "weight": w} for loc, w in m.atoms]}
    if m.density is not None:
        cfg["density"] = {"name": m.density.name, "s_max": m.density.s_max, **m.density.params}
    return cfg


def grid_from_config(cfg) -> Grid:
    try:
        return Grid(float(cfg["h"]), float(cfg["T"]))
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad grid config {cfg!r}: {exc}") from exc


def grid_to_config(g: Grid) -> dict:
    return {"h": g.h, "T": g.T}


def load(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc


def builtin(name: str) -> dict:
    """Load one of the shipped configs (``suite``, ``hypothesis_gate``)."""
    ref = resources.files("volterra_lab") / "data" / f"{name}.json"
    return json.loads(ref.read_text())


def builtin_path(name: str) -> Path:
    return Path(str(resources.files("volterra_lab") / "data" / f"{name}.json"))
