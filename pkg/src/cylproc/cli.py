"""Command-line runner: ``cylproc run|validate|list-experiments``.

Exit status: 0 when every assertion passes, 1 when one fails or a
computation raises, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np
from scipy.stats import poisson

from . import bounds as bd
from . import geometry as geo
from . import meanvalues as mv
from . import process as pr
from . import svg
from .config import EXPERIMENTS, load_config
from .errors import ConfigError, CylprocError
from .sampling import DeterministicBall, RngStream, RotatedFixed
from .serialize import body_to_spec

FORMULAS = {
    "p": "1 - exp(-gamma m_{d-k})",
    "m": "E V_{d-k}(Xi)",
    "mean_volume": "lambda_d(W) (1 - exp(-gamma m_{d-k}))",
    "mean_surface": ("gamma V_d(W) m_{d-k-1} exp(-gamma m_{d-k}) "
                     "+ V_{d-1}(W) (1 - exp(-gamma m_{d-k}))"),
    "mean_intrinsic": "closed form of E V_j(Z cap W) for j >= k",
    "alpha": "lambda_{d-k}(M) diam(W)^k",
    "beta": ("p / lambda_{d-k}(M) sum_j kappa_j kappa_{d-j} / (C(d,j) kappa_d) "
             "V_j(W) V_{d-k-j}(M)"),
    "a": "kappa_{d-k} rho^{d-k} (2R)^k",
    "b": "p / m_{d-k} kappa_{d-k} R^{d-k} (1 + rho/R)^{d-k}",
    "volume_bound": "inf_s (p/m_{d-k}) E[h(Theta, Xi) Psi(+-s lambda(Xi) diam(W)^k)] - r s",
    "intrinsic_bound": "inf_s E[h(Theta, Xi) Psi(+-s A(Xi)) sum_m beta_m A(Xi)^{m/j}] - r s",
    "kflat_bound": "-(r / 2b) log(1 + b r / a^2)",
    "beta_m": "coefficients of the intrinsic-volume exponent",
    "capacity": "1 - exp(-gamma E lambda_{d-k}(P(Theta^T C) + Xi*))",
    "scaling": "slope of log(-log bound) against log r for windows r^(1/d) W",
    "poisson_ref": "log P(X - beta >= r/alpha), X ~ Poisson(beta)",
}


def closed(value, formula):
    return {"value": float(value), "provenance": "closed-form",
            "formula": FORMULAS[formula]}


def empirical(value, se):
    return {"value": float(value), "se": float(se), "provenance": "empirical"}


def mc_analytic(value, se, formula):
    return {"value": float(value), "se": float(se), "provenance": "mc-analytic",
            "formula": FORMULAS[formula]}


def _assert(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


# --------------------------------------------------------------------------
# constants shared by validate and run
# --------------------------------------------------------------------------

def _rotated_body(law):
    if isinstance(law, (RotatedFixed, DeterministicBall)):
        return law.body
    return None


def derived_constants(cfg):
    p = cfg.process
    w = cfg.window
    out = {"p": closed(p.p, "p")}
    if p.law.degenerate:
        return out
    out["m_{d-k}"] = closed(p.base_volume, "m")
    out["mean_volume"] = closed(mv.mean_volume(p, w), "mean_volume")
    if p.n >= 1 and geo.intrinsic_volumes(w)[p.d - 1] is not None:
        out["mean_surface"] = closed(mv.mean_intrinsic_dminus1(p, w), "mean_surface")
    m_body = _rotated_body(p.law)
    if m_body is not None:
        try:
            params = bd.rotated_base_params(m_body, w, p)
            out["alpha"] = closed(params.alpha, "alpha")
            out["beta"] = closed(params.beta, "beta")
        except CylprocError:
            pass
    if isinstance(w, geo.Ball) and isinstance(p.law, DeterministicBall):
        ab = bd.ball_ball_params(w.radius, p.law.rho, p)
        out["a"] = closed(ab.alpha, "a")
        out["b"] = closed(ab.beta, "b")
    for j in _js(cfg):
        if j >= max(p.k, 1):
            out[f"beta_m[j={j}]"] = {"value": bd.intrinsic_beta_coeffs(p, j),
                                     "provenance": "closed-form",
                                     "formula": FORMULAS["beta_m"]}
    return out


def _js(cfg):
    if cfg.j is None:
        return []
    return cfg.j if isinstance(cfg.j, list) else [cfg.j]


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def _tail_compare(cfg, workers):
    p, w = cfg.process, cfg.window
    values, inner = pr.replicate_volumes(p, w, cfg.n_reps, cfg.n_points,
                                         RngStream(cfg.seed, 0), workers)
    sd = float(values.std(ddof=1))
    grid = cfg.r_grid.resolve(sd)
    tc = pr.empirical_tail(p, w, cfg.n_reps, cfg.n_points, grid, None, values=values)
    table = bd.mark_table(p, w, rng=RngStream(cfg.seed, 1).generator())
    up = [bd.volume_tail_bound(p, w, r, "upper", table, full=True) for r in grid]
    lo = [bd.volume_tail_bound(p, w, r, "lower", table, full=True) for r in grid]
    stats = {
        "mean_hat": empirical(tc.mean_hat, sd / math.sqrt(len(values))),
        "sd_hat": empirical(sd, sd / math.sqrt(2 * (len(values) - 1))),
        "inner_se_mean": empirical(float(inner.mean()), 0.0),
    }
    consts = derived_constants(cfg)
    poisson_ref = [math.nan] * len(grid)
    if "alpha" in consts:
        a, b = consts["alpha"]["value"], consts["beta"]["value"]
        poisson_ref = [float(poisson.logsf(math.ceil(b + r / a) - 1, b)) for r in grid]
    asserts = []
    for i, r in enumerate(grid):
        slack_u = math.exp(up[i].value) + tc.upper_halfwidth[i]
        slack_l = math.exp(lo[i].value) + tc.lower_halfwidth[i]
        asserts.append(_assert(f"upper_tail[r={r:.6g}]", tc.upper[i] <= slack_u,
                               f"empirical {tc.upper[i]:.6g} <= bound + half-width {slack_u:.6g}"))
        asserts.append(_assert(f"lower_tail[r={r:.6g}]", tc.lower[i] <= slack_l,
                               f"empirical {tc.lower[i]:.6g} <= bound + half-width {slack_l:.6g}"))
    header = ["r", "emp_upper", "emp_upper_hw", "emp_lower", "emp_lower_hw",
              "log_bound_upper", "log_bound_lower", "log_poisson_ref"]
    rows = [[repr(float(r)), repr(float(tc.upper[i])), repr(float(tc.upper_halfwidth[i])),
             repr(float(tc.lower[i])), repr(float(tc.lower_halfwidth[i])),
             repr(up[i].value), repr(lo[i].value), repr(poisson_ref[i])]
            for i, r in enumerate(grid)]
    floor = math.log(1.0 / cfg.n_reps)
    series = [
        {"label": "empirical upper", "x": grid, "style": "points",
         "log_y": [math.log(u) if u > 0 else -math.inf for u in tc.upper]},
        {"label": "empirical lower", "x": grid, "style": "points",
         "log_y": [math.log(v) if v > 0 else -math.inf for v in tc.lower]},
        {"label": "upper bound", "x": grid, "style": "line", "log_y": [b.value for b in up]},
        {"label": "lower bound", "x": grid, "style": "line", "log_y": [b.value for b in lo]},
        {"label": "Poisson reference", "x": grid, "style": "line", "dashed": True,
         "log_y": poisson_ref},
    ]
    analytic = {
        "log_bound_upper": [{"r": float(r), **mc_analytic(b.value, b.se, "volume_bound"),
                             "path": b.path} for r, b in zip(grid, up)],
        "log_bound_lower": [{"r": float(r), **mc_analytic(b.value, b.se, "volume_bound"),
                             "path": b.path} for r, b in zip(grid, lo)],
        "empirical_floor_log": floor,
    }
    return consts, stats, analytic, asserts, (header, rows), series


def _mean_check(cfg, workers):
    p, w = cfg.process, cfg.window
    j = p.d if cfg.j is None else cfg.j
    consts = derived_constants(cfg)
    if j == p.d:
        values, _ = pr.replicate_volumes(p, w, cfg.n_reps, cfg.n_points,
                                         RngStream(cfg.seed, 0), workers)
        target = mv.mean_volume(p, w)
        label = "mean_volume"
    else:
        eps = cfg.eps if cfg.eps is not None else 0.02 * geo.inradius(w)
        values = pr.replicate_surfaces(p, w, cfg.n_reps, cfg.n_points,
                                       RngStream(cfg.seed, 0), eps, workers)
        target = mv.mean_intrinsic_dminus1(p, w)
        label = "mean_surface"
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values)))
    stats = {f"replicate_{label}": empirical(mean, se)}
    if j == p.d:
        ok = abs(mean - target) <= cfg.n_se * se
        detail = f"|{mean:.6g} - {target:.6g}| <= {cfg.n_se:g} x {se:.3g}"
    else:
        ok = abs(mean - target) <= cfg.rel_tol * abs(target)
        detail = f"|{mean:.6g} - {target:.6g}| <= {cfg.rel_tol:g} x |target|"
    asserts = [_assert(f"{label}_agreement", ok, detail)]
    header = ["quantity", "empirical", "se", "analytic"]
    rows = [[label, repr(mean), repr(se), repr(target)]]
    return consts, stats, {label: closed(target, label)}, asserts, (header, rows), None


def _capacity_check(cfg, workers):
    p = cfg.process
    body = cfg.capacity_body if cfg.capacity_body is not None else cfg.window
    emp = pr.capacity_empirical(p, body, cfg.n_reps, RngStream(cfg.seed, 0), workers)
    ana = pr.capacity_analytic(p, body, cfg.n_mark_samples,
                               RngStream(cfg.seed, 1).generator())
    comb = math.hypot(emp.se, ana.se)
    ok = abs(emp.value - ana.value) <= cfg.n_se * comb
    asserts = [_assert("capacity_agreement", ok,
                       f"|{emp.value:.6g} - {ana.value:.6g}| <= {cfg.n_se:g} x {comb:.3g}")]
    analytic = {"capacity": (closed(ana.value, "capacity") if ana.se == 0
                             else mc_analytic(ana.value, ana.se, "capacity")),
                "capacity_path": ana.path}
    header = ["quantity", "empirical", "empirical_se", "analytic", "analytic_se"]
    rows = [["capacity", repr(emp.value), repr(emp.se), repr(ana.value), repr(ana.se)]]
    return (derived_constants(cfg), {"capacity": empirical(emp.value, emp.se)},
            analytic, asserts, (header, rows), None)


def _bound_curves(cfg, workers):
    p, w = cfg.process, cfg.window
    grid = cfg.r_grid.resolve()
    j = cfg.j
    if isinstance(j, list):
        j = j[0]
    if p.law.degenerate:
        up = [bd.kflat_bound(p, w, r) for r in grid]
        curve = bd.BoundCurve(grid, np.array(up), np.full(len(grid), math.nan), "closed-form")
        formula = "kflat_bound"
    else:
        table = bd.mark_table(p, w, rng=RngStream(cfg.seed, 1).generator())
        if j is None or j == p.d:
            fn = lambda r, t: bd.volume_tail_bound(p, w, r, t, table, full=True)
            formula = "volume_bound"
        else:
            fn = lambda r, t: bd.intrinsic_tail_bound(p, w, j, r, t, table, full=True)
            formula = "intrinsic_bound"
        curve = bd.bound_curve(fn, grid)
    u = curve.log_upper_bound
    asserts = [
        _assert("upper_nonpositive", bool(np.all(u <= 1e-12)), "log bound <= 0"),
        _assert("upper_nonincreasing", bool(np.all(np.diff(u) <= 1e-12)),
                "log bound nonincreasing in r"),
    ]
    header = list(bd.BOUND_CSV_COLUMNS)
    rows = list(curve.rows())
    series = [{"label": "upper bound", "x": grid, "style": "line", "log_y": list(u)},
              {"label": "lower bound", "x": grid, "style": "line",
               "log_y": list(curve.log_lower_bound)}]
    analytic = {"curve": curve.to_dict(), "formula": FORMULAS[formula]}
    return derived_constants(cfg), {}, analytic, asserts, (header, rows), series


def _scaling_probe(cfg, workers):
    p = cfg.process
    m_body = p.law.body
    grid = cfg.r_grid.resolve()
    target = 1.0 - p.k / p.d
    entries = [("volume", None)]
    if cfg.j is not None:
        js = cfg.j if isinstance(cfg.j, list) else [cfg.j]
        entries += [(f"V_{j}", j) for j in js if j != p.d]
    asserts, rows, analytic = [], [], {}
    for name, j in entries:
        slope = bd.scaling_exponent_probe(m_body, cfg.window, p, grid, j)
        ok = abs(slope - target) <= cfg.slope_tol
        asserts.append(_assert(f"slope[{name}]", ok,
                               f"|{slope:.4f} - {target:.4f}| <= {cfg.slope_tol:g}"))
        rows.append([name, repr(slope), repr(target)])
        analytic[f"slope[{name}]"] = closed(slope, "scaling")
    return (derived_constants(cfg), {}, analytic, asserts,
            (["quantity", "slope", "target"], rows), None)


def _coeff_dump(cfg, workers):
    p = cfg.process
    js = cfg.j if isinstance(cfg.j, list) else ([cfg.j] if cfg.j is not None
                                                 else list(range(max(p.k, 1), p.d + 1)))
    rows, asserts, analytic = [], [], {}
    for j in js:
        betas = bd.intrinsic_beta_coeffs(p, j)
        analytic[f"beta_m[j={j}]"] = {"value": betas, "provenance": "closed-form",
                                      "formula": FORMULAS["beta_m"]}
        rows.extend([[j, m, repr(b)] for m, b in enumerate(betas)])
        asserts.append(_assert(f"nonnegative[j={j}]", all(b >= 0 for b in betas),
                               "all coefficients >= 0"))
        if len(betas) > 1:
            asserts.append(_assert(f"beta_1_zero[j={j}]", betas[1] == 0.0, "beta_1 = 0"))
        if j == p.d:
            ok = len(betas) == 1 and math.isclose(betas[0], p.p / p.base_volume,
                                                  rel_tol=1e-14)
            asserts.append(_assert("collapse[j=d]", ok, "coefficients = [p / m_{d-k}]"))
    return (derived_constants(cfg), {}, analytic, asserts,
            (["j", "m", "beta"], rows), None)


RUNNERS = {
    "tail_compare": _tail_compare,
    "mean_check": _mean_check,
    "capacity_check": _capacity_check,
    "bound_curves": _bound_curves,
    "scaling_probe": _scaling_probe,
    "coeff_dump": _coeff_dump,
}


def _describe_inputs(cfg):
    p = cfg.process
    doc = dict(cfg.raw)
    doc["seed"] = cfg.seed
    doc["resolved"] = {"d": p.d, "k": p.k, "gamma": p.gamma,
                       "window": body_to_spec(cfg.window)}
    return doc


def run_experiment(cfg, out_dir, workers=1):
    """Execute ``cfg`` and write the report files; returns the summary dict."""
    consts, stats, analytic, asserts, (header, rows), series = \
        RUNNERS[cfg.experiment](cfg, workers)
    os.makedirs(out_dir, exist_ok=True)
    summary = {
        "experiment": cfg.experiment,
        "inputs": _describe_inputs(cfg),
        "constants": consts,
        "statistics": stats,
        "analytic": analytic,
        "assertions": asserts,
        "passed": all(a["passed"] for a in asserts),
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "curves.csv"), "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
    if cfg.emit_svg and series:
        with open(os.path.join(out_dir, "curves.svg"), "w") as fh:
            fh.write(svg.render(series, title=cfg.experiment))
    return summary


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _parser():
    ap = argparse.ArgumentParser(prog="cylproc",
                                 description="Poisson cylinder process experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--threads", type=int, default=1, help="worker processes")
    run.add_argument("--out", default=None, help="output directory")
    val = sub.add_parser("validate", help="check a config and print derived constants")
    val.add_argument("config")
    sub.add_parser("list-experiments", help="list experiment kinds")
    return ap


def _print_constants(consts, stream):
    for name, entry in consts.items():
        v = entry["value"]
        shown = ", ".join(f"{x:.10g}" for x in v) if isinstance(v, list) else f"{v:.10g}"
        print(f"{name} = {shown}    [{entry['provenance']}: {entry['formula']}]", file=stream)


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "list-experiments":
        for name, desc in EXPERIMENTS.items():
            print(f"{name:16s} {desc}")
        return 0
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        try:
            consts = derived_constants(cfg)
        except CylprocError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        print(f"experiment: {cfg.experiment} (valid)")
        _print_constants(consts, sys.stdout)
        return 0
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads < 1:
        print("config error: --threads must be at least 1", file=sys.stderr)
        return 2
    out = args.out or cfg.output or "cylproc-out"
    try:
        summary = run_experiment(cfg, out, args.threads)
    except CylprocError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    for a in summary["assertions"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'} {a['name']}: {a['detail']}")
    print(f"wrote {out}/summary.json, {out}/curves.csv")
    return 0 if summary["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
