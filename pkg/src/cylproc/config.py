"""Experiment configuration: parsing and validation of the JSON schema.

A configuration document looks like::

    {
      "schema_version": 1,
      "experiment": "tail_compare",
      "process": {"d": 3, "k": 1, "gamma": 0.3,
                  "law": {"ball": {"radius": 0.5}}},
      "window": {"ball": {"radius": 1.0}},
      "n_reps": 2000, "n_points": 20000,
      "r_grid": {"min": 0.0, "max": "3sd", "count": 12, "spacing": "linear"},
      "seed": 20240611,
      "emit_svg": true
    }

Law descriptors: ``{"ball": {"radius": rho}}``, ``{"point": {}}``,
``{"rotated_fixed": {"body": <body>}}`` and ``{"rotated_dilated": {"body":
<body>, "radius": {"constant": c} | {"discrete": [[value, prob], ...]}}}``.
The two rotated forms accept an optional ``"r_max"``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, CylprocError
from .process import ProcessConfig
from .sampling import (ConstantRadius, DeterministicBall, DiscreteRadius,
                       PointBase, RotatedDilated, RotatedFixed)
from .serialize import body_from_spec

SCHEMA_VERSION = 1

EXPERIMENTS = {
    "tail_compare": "empirical upper/lower tails of the volume against the analytic bounds",
    "mean_check": "replicate mean of the volume (j = d) or surface proxy (j = d-1) against the mean-value formula",
    "capacity_check": "empirical hitting probability against the analytic capacity functional",
    "bound_curves": "analytic log-bound curves for the volume or an intrinsic volume",
    "scaling_probe": "fitted growth exponent of -log bound for windows r^(1/d) W",
    "coeff_dump": "coefficients of the intrinsic-volume exponent",
}

KNOWN_KEYS = {
    "schema_version", "experiment", "process", "window", "n_reps", "n_points",
    "r_grid", "seed", "output", "emit_svg", "j", "capacity_body",
    "n_mark_samples", "eps", "assertions", "comment",
}


@dataclass
class RGrid:
    min: float
    max: float | str
    count: int
    spacing: str = "linear"

    def resolve(self, sd=None):
        top = self.max
        if isinstance(top, str):
            top = float(top[:-2]) * sd
        if self.spacing == "log":
            return np.logspace(math.log10(self.min), math.log10(top), self.count)
        return np.linspace(self.min, top, self.count)


@dataclass
class ExperimentConfig:
    experiment: str
    process: ProcessConfig
    window: object
    n_reps: int = 1000
    n_points: int = 20000
    r_grid: RGrid | None = None
    seed: int = 0
    output: str | None = None
    emit_svg: bool = False
    j: object = None
    capacity_body: object = None
    n_mark_samples: int = 2000
    eps: float | None = None
    n_se: float = 4.0
    rel_tol: float = 0.1
    slope_tol: float = 0.05
    raw: dict = field(default_factory=dict, repr=False)


def _require(doc, key, kind, where):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field '{key}'")
    val = doc[key]
    if (isinstance(val, bool) and kind is not bool) or not isinstance(val, kind):
        raise ConfigError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, "
                          f"got {type(val).__name__}")
    return val


def _radius_law(spec, where):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"{where}: expected {{'constant': c}} or {{'discrete': [[v, p], ...]}}")
    (kind, val), = spec.items()
    try:
        if kind == "constant":
            return ConstantRadius(float(val))
        if kind == "discrete":
            return DiscreteRadius.from_pairs([(float(v), float(p)) for v, p in val])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{kind}: {exc}") from exc
    raise ConfigError(f"{where}: unknown radius law '{kind}'")


def law_from_spec(spec, n, where="process.law"):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"{where}: expected a single-key mapping "
                          "(ball, point, rotated_fixed, rotated_dilated)")
    (kind, args), = spec.items()
    if not isinstance(args, dict):
        raise ConfigError(f"{where}.{kind}: expected a mapping of fields")
    r_max = args.get("r_max")
    try:
        if kind == "ball":
            rho = float(_require(args, "radius", (int, float), f"{where}.ball"))
            return DeterministicBall(rho, n, r_max)
        if kind == "point":
            return PointBase(n)
        if kind in ("rotated_fixed", "rotated_dilated"):
            body = body_from_spec(_require(args, "body", dict, f"{where}.{kind}"),
                                  n, f"{where}.{kind}.body")
            if kind == "rotated_fixed":
                return RotatedFixed(body, r_max)
            law = _radius_law(args.get("radius", {"constant": 1.0}),
                              f"{where}.{kind}.radius")
            return RotatedDilated(body, law, r_max)
    except ConfigError:
        raise
    except (CylprocError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}.{kind}: {exc}") from exc
    raise ConfigError(f"{where}: unknown law '{kind}'")


def _parse_grid(spec):
    where = "r_grid"
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping with min, max, count, spacing")
    lo = float(_require(spec, "min", (int, float), where))
    hi = spec.get("max")
    if isinstance(hi, str):
        try:
            if not hi.endswith("sd") or float(hi[:-2]) <= 0:
                raise ValueError
        except ValueError:
            raise ConfigError(f"{where}.max: expected a number or '<c>sd' such as '3sd'") from None
    elif not isinstance(hi, (int, float)) or isinstance(hi, bool):
        raise ConfigError(f"{where}.max: expected a number or '<c>sd'")
    elif hi <= lo:
        raise ConfigError(f"{where}: max must exceed min (r_grid strictly increasing)")
    count = _require(spec, "count", int, where)
    if count < 2:
        raise ConfigError(f"{where}.count: need at least 2 points")
    spacing = spec.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError(f"{where}.spacing: expected 'linear' or 'log'")
    if spacing == "log" and lo <= 0:
        raise ConfigError(f"{where}: log spacing needs min > 0")
    return RGrid(lo, hi, count, spacing)


def parse_config(doc):
    """Validate a configuration mapping and build an :class:`ExperimentConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(doc) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    version = _require(doc, "schema_version", int, "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config.schema_version: unsupported version {version} "
                          f"(expected {SCHEMA_VERSION})")
    kind = _require(doc, "experiment", str, "config")
    if kind not in EXPERIMENTS:
        raise ConfigError(f"config.experiment: unknown kind '{kind}' "
                          f"(one of {', '.join(EXPERIMENTS)})")
    proc = _require(doc, "process", dict, "config")
    d = _require(proc, "d", int, "process")
    k = _require(proc, "k", int, "process")
    if d < 1:
        raise ConfigError("process.d: must be at least 1")
    if not 0 <= k <= d - 1:
        raise ConfigError(f"process.k: need 0 <= k <= d-1 (got k={k}, d={d})")
    gamma = float(_require(proc, "gamma", (int, float), "process"))
    if not gamma > 0:
        raise ConfigError("process.gamma: intensity must be positive")
    law = law_from_spec(_require(proc, "law", dict, "process"), d - k)
    try:
        pcfg = ProcessConfig(d, k, gamma, law)
    except (CylprocError, ValueError) as exc:
        raise ConfigError(f"process: {exc}") from exc
    window = body_from_spec(_require(doc, "window", dict, "config"), d, "window")

    cfg = ExperimentConfig(kind, pcfg, window, raw=doc)
    for key in ("n_reps", "n_points", "n_mark_samples"):
        if key in doc:
            val = _require(doc, key, int, "config")
            if val < 1:
                raise ConfigError(f"config.{key}: must be at least 1")
            setattr(cfg, key, val)
    if "seed" in doc:
        cfg.seed = _require(doc, "seed", int, "config")
    if "output" in doc:
        cfg.output = _require(doc, "output", str, "config")
    if "emit_svg" in doc:
        cfg.emit_svg = _require(doc, "emit_svg", bool, "config")
    if "eps" in doc:
        cfg.eps = float(_require(doc, "eps", (int, float), "config"))
    if "r_grid" in doc:
        cfg.r_grid = _parse_grid(doc["r_grid"])
    if "capacity_body" in doc:
        cfg.capacity_body = body_from_spec(doc["capacity_body"], d, "capacity_body")
    if "assertions" in doc:
        a = _require(doc, "assertions", dict, "config")
        for key in ("n_se", "rel_tol", "slope_tol"):
            if key in a:
                setattr(cfg, key, float(_require(a, key, (int, float), "assertions")))
    if "j" in doc:
        j = doc["j"]
        js = j if isinstance(j, list) else [j]
        for v in js:
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= d:
                raise ConfigError(f"config.j: expected integers in 0..{d}")
            if v < k and kind in ("bound_curves", "coeff_dump", "scaling_probe", "mean_check"):
                raise ConfigError(
                    f"config.j: intrinsic-volume formulas need j >= k (got j={v}, k={k})")
        cfg.j = j
    _check_kind(cfg)
    return cfg


def _check_kind(cfg):
    p = cfg.process
    if p.law.degenerate and cfg.experiment not in ("bound_curves",):
        raise ConfigError("process.law: a point base only supports bound_curves (k-flat bound)")
    if cfg.experiment in ("tail_compare", "bound_curves") and cfg.r_grid is None:
        raise ConfigError(f"config.r_grid: required for {cfg.experiment}")
    if cfg.experiment == "bound_curves" and isinstance(cfg.r_grid.max, str):
        raise ConfigError("r_grid.max: 'sd' multiples need a simulation; give a number")
    if cfg.experiment == "mean_check":
        j = p.d if cfg.j is None else cfg.j
        if j not in (p.d, p.d - 1):
            raise ConfigError(f"config.j: mean_check supports j = d or d-1 (got {j})")
    if cfg.experiment == "scaling_probe":
        if not hasattr(p.law, "body") or not isinstance(p.law, (RotatedFixed, DeterministicBall)):
            raise ConfigError("process.law: scaling_probe needs a rotated-fixed base")
        if cfg.r_grid is None:
            cfg.r_grid = RGrid(1e3, 1e6, 13, "log")
        elif cfg.r_grid.spacing != "log":
            raise ConfigError("r_grid.spacing: scaling_probe needs log spacing")
    if cfg.experiment == "coeff_dump" and cfg.j is not None:
        js = cfg.j if isinstance(cfg.j, list) else [cfg.j]
        if 0 in js:
            raise ConfigError("config.j: coefficients need j >= 1")


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(doc)
