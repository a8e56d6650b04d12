"""Simulation of Poisson k-cylinder processes observed through a window.

A realization keeps only the cylinders hitting the window.  They are
sampled exactly: germs are drawn from a Poisson process on a ball of
radius ``R0 = circumradius(W) + r_max`` in the base space, which contains
every germ whose cylinder can reach ``W``, and each candidate is kept iff
``x`` lies in ``P(theta^T W) + (-K)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import NamedTuple

import numpy as np

from . import geometry as geo
from .errors import (
    DegenerateWindow,
    DimensionMismatch,
    EpsTooLarge,
    InnerNoiseTooLarge,
    RejectionStall,
    UnboundedBase,
)
from .sampling import RngStream, as_generator, moment, poisson_count, sample_mark

__all__ = [
    "ProcessConfig", "Cylinder", "Realization", "TailCurve", "Estimate",
    "sample_realization", "point_in_union", "estimate_volume",
    "estimate_surface", "replicate_volumes", "empirical_tail",
    "capacity_empirical", "capacity_analytic", "hitting_measure",
    "retained_counts", "wilson_halfwidth", "run_replicates", "sample_in_body",
]


class Estimate(NamedTuple):
    value: float
    se: float
    path: str = "mc"


@dataclass(frozen=True, eq=False)
class ProcessConfig:
    d: int
    k: int
    gamma: float
    law: object

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if not 0 <= self.k <= self.d - 1:
            raise ValueError(f"need 0 <= k <= d-1, got k={self.k}, d={self.d}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("intensity gamma must be positive")
        if self.law.dim != self.d - self.k:
            raise DimensionMismatch(
                f"base law lives in R^{self.law.dim}, expected R^{self.d - self.k}")
        if not self.law.degenerate and not self.base_volume > 0:
            raise ValueError("mean base volume must be positive")

    @property
    def n(self):
        """Dimension ``d - k`` of the base space."""
        return self.d - self.k

    @property
    def base_volume(self):
        """Mean base volume ``m_{d-k}``."""
        return moment(self.law, self.n)

    @property
    def p(self):
        """Volume fraction ``1 - exp(-gamma m_{d-k})``."""
        return -math.expm1(-self.gamma * self.base_volume)


@dataclass(frozen=True, eq=False)
class Cylinder:
    x: np.ndarray
    theta: geo.Rotation
    base: object

    def contains(self, w):
        n = self.base.dim
        y = (np.asarray(w, float) @ self.theta.matrix)[..., :n] - self.x
        return geo.contains(self.base, y)

    def distance(self, w):
        n = self.base.dim
        y = (np.asarray(w, float) @ self.theta.matrix)[..., :n] - self.x
        return geo.distance(self.base, y)


@dataclass(frozen=True, eq=False)
class Realization:
    cylinders: list
    window: object
    sampling_radius: float
    n_candidates: int = 0

    def __len__(self):
        return len(self.cylinders)


@dataclass
class TailCurve:
    r_grid: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    n_reps: int
    mean_hat: float
    upper_halfwidth: np.ndarray
    lower_halfwidth: np.ndarray
    sd_hat: float = float("nan")
    values: np.ndarray = field(default=None, repr=False)


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def _uniform_in_ball(g, n, radius, size):
    z = g.standard_normal((size, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = radius * g.random(size) ** (1.0 / n)
    return z * r[:, None]


def _hits(window, k, theta, base, x):
    proj = geo.project_rotated(window, theta, k)
    return bool(geo.minkowski_contains(proj, geo.reflect(base), x[None, :])[0])


def _check_window(window):
    if geo.inradius(window) <= 0:
        raise DegenerateWindow("window has empty interior")
    if not geo.contains(window, np.zeros(window.dim)):
        raise DegenerateWindow("window must contain the origin; translate it first")


def _sample_hitting(cfg, window, g, first_only=False):
    if window.dim != cfg.d:
        raise DimensionMismatch("window dimension differs from d")
    r_max = getattr(cfg.law, "r_max", None)
    if r_max is None or not math.isfinite(r_max):
        raise UnboundedBase("base law must declare a finite r_max")
    r0 = geo.circumradius(window) + r_max
    n = cfg.n
    mean = cfg.gamma * geo.unit_ball_volume(n) * r0 ** n
    count = poisson_count(mean, g)
    xs = _uniform_in_ball(g, n, r0, count)
    kept = []
    for x in xs:
        theta, base = sample_mark(cfg.law, cfg.d, cfg.k, g)
        if _hits(window, cfg.k, theta, base, x):
            kept.append(Cylinder(x, theta, base))
            if first_only:
                break
    return Realization(kept, window, r0, count)


def sample_realization(cfg, window, rng):
    """Cylinders of one realization that hit ``window`` (which must contain 0)."""
    _check_window(window)
    return _sample_hitting(cfg, window, as_generator(rng))


def point_in_union(real, w):
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1], dtype=bool)
    for cyl in real.cylinders:
        out |= cyl.contains(w)
    return out


def sample_in_body(body, n_points, rng):
    """Uniform points in ``body`` by rejection from its bounding box."""
    g = as_generator(rng)
    lo, hi = geo.bounding_box(body)
    accept = geo.volume(body) / float(np.prod(hi - lo))
    if accept < 1e-3:
        raise RejectionStall(f"acceptance rate {accept:.2e} below 1e-3")
    out = []
    need = n_points
    while need > 0:
        batch = int(need / accept * 1.1) + 16
        z = lo + (hi - lo) * g.random((batch, body.dim))
        z = z[geo.contains(body, z)]
        out.append(z[:need])
        need -= len(out[-1])
    return np.concatenate(out)


def _solid(cyl):
    # bases of zero volume give null cylinders
    return not (isinstance(cyl.base, geo.PolytopeV)
                and cyl.base.affine_rank < cyl.base.dim)


def estimate_volume(real, window, n_points, rng):
    """Hit-or-miss estimate of ``vol(Z cap W)`` and its inner standard error."""
    if n_points < 1000:
        raise ValueError("n_points must be at least 1000")
    vol_w = geo.volume(window)
    cyls = [c for c in real.cylinders if _solid(c)]
    if not cyls:
        return 0.0, 0.0
    pts = sample_in_body(window, n_points, rng)
    hit = np.zeros(n_points, dtype=bool)
    for cyl in cyls:
        hit |= cyl.contains(pts)
    frac = hit.mean()
    return vol_w * frac, vol_w * math.sqrt(frac * (1.0 - frac) / n_points)


def estimate_surface(real, window, eps, n_points, rng):
    """Parallel-set estimate of ``V_{d-1}(Z cap W)``.

    ``[vol((Z cap W) + B_eps) - vol(Z cap W)] / (2 eps)``; the parallel set
    is approximated by points within ``eps`` of both ``W`` and some
    cylinder.  Bias is O(eps).
    """
    r_in = geo.inradius(window)
    if eps <= 0 or eps > r_in / 10:
        raise EpsTooLarge(f"eps={eps} must lie in (0, inradius/10 = {r_in / 10}]")
    g = as_generator(rng)
    lo, hi = geo.bounding_box(window)
    lo, hi = lo - eps, hi + eps
    box_vol = float(np.prod(hi - lo))
    y = lo + (hi - lo) * g.random((int(n_points), window.dim))
    near_w = geo.distance(window, y) <= eps
    in_w = geo.contains(window, y)
    in_z = np.zeros(len(y), dtype=bool)
    near_z = np.zeros(len(y), dtype=bool)
    for cyl in real.cylinders:
        dist = cyl.distance(y)
        near_z |= dist <= eps
        if _solid(cyl):
            in_z |= dist <= 0.0
    shell = np.count_nonzero(near_w & near_z) - np.count_nonzero(in_w & in_z)
    return box_vol * shell / (len(y) * 2.0 * eps)


# --------------------------------------------------------------------------
# replication
# --------------------------------------------------------------------------

def run_replicates(func, stream, n_reps, workers=1):
    """``[func(stream.replicate(r)) for r in range(n_reps)]``, optionally in parallel.

    Each replicate owns its stream, so the result does not depend on
    ``workers``.
    """
    streams = [stream.replicate(r) for r in range(n_reps)]
    if workers <= 1:
        return [func(s) for s in streams]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, streams, chunksize=max(1, n_reps // (4 * workers))))


def _as_stream(rng):
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError("replicated experiments need an RngStream or an integer seed")


def _volume_replicate(stream, cfg, window, n_points):
    g = stream.generator()
    real = _sample_hitting(cfg, window, g)
    return estimate_volume(real, window, n_points, g)


def replicate_volumes(cfg, window, n_reps, n_points, rng, workers=1):
    """Arrays ``(F_hat, inner_se)`` over independent replications."""
    _check_window(window)
    fn = partial(_volume_replicate, cfg=cfg, window=window, n_points=n_points)
    res = run_replicates(fn, _as_stream(rng), n_reps, workers)
    arr = np.array(res, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def _surface_replicate(stream, cfg, window, eps, n_points):
    g = stream.generator()
    real = _sample_hitting(cfg, window, g)
    return estimate_surface(real, window, eps, n_points, g)


def replicate_surfaces(cfg, window, n_reps, n_points, rng, eps=None, workers=1):
    _check_window(window)
    if eps is None:
        eps = 0.02 * geo.inradius(window)
    fn = partial(_surface_replicate, cfg=cfg, window=window, eps=eps,
                 n_points=n_points)
    return np.array(run_replicates(fn, _as_stream(rng), n_reps, workers))


def wilson_halfwidth(phat, n, z=1.959963984540054):
    phat = np.asarray(phat, dtype=float)
    denom = 1.0 + z * z / n
    return z / denom * np.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n))


def empirical_tail(cfg, window, n_reps, n_points, r_grid, rng, workers=1,
                   values=None):
    """Empirical upper/lower exceedance frequencies of ``F - mean(F)``.

    ``values`` may pass precomputed replicate volumes to reuse a simulation.
    """
    if n_reps < 100:
        raise ValueError("n_reps must be at least 100")
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or np.any(np.diff(r_grid) <= 0):
        raise ValueError("r_grid must be strictly increasing")
    vol_w = geo.volume(window)
    p = cfg.p
    inner = vol_w * math.sqrt(p * (1.0 - p) / n_points)
    spacing = np.min(np.diff(r_grid)) if len(r_grid) > 1 else np.inf
    if 3.0 * inner > spacing:
        raise InnerNoiseTooLarge(
            f"3 x inner s.e. = {3 * inner:.4g} exceeds grid spacing {spacing:.4g}")
    if values is None:
        values, _ = replicate_volumes(cfg, window, n_reps, n_points, rng, workers)
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = float(values.mean())
    dev = values - mean
    upper = np.array([np.count_nonzero(dev >= r) for r in r_grid]) / n
    lower = np.array([np.count_nonzero(dev <= -r) for r in r_grid]) / n
    return TailCurve(r_grid, upper, lower, n, mean,
                     wilson_halfwidth(upper, n), wilson_halfwidth(lower, n),
                     float(values.std(ddof=1)), values)


def _count_replicate(stream, cfg, window):
    real = _sample_hitting(cfg, window, stream.generator())
    return len(real.cylinders)


def retained_counts(cfg, window, n_reps, rng, workers=1):
    """Number of hitting cylinders in each replication."""
    fn = partial(_count_replicate, cfg=cfg, window=window)
    return np.array(run_replicates(fn, _as_stream(rng), n_reps, workers))


# --------------------------------------------------------------------------
# capacity functional
# --------------------------------------------------------------------------

def _nonempty_replicate(stream, cfg, body):
    return len(_sample_hitting(cfg, body, stream.generator(), first_only=True)) > 0


def capacity_empirical(cfg, body, n_reps, rng, workers=1):
    """Fraction of replications in which the union set hits ``body``."""
    fn = partial(_nonempty_replicate, cfg=cfg, body=body)
    hits = np.array(run_replicates(fn, _as_stream(rng), n_reps, workers))
    t = float(hits.mean())
    return Estimate(t, math.sqrt(t * (1.0 - t) / n_reps), "empirical")


def hitting_measure(window, theta, base, k, rng=None, n_mc=20000):
    """``vol_{d-k}(P(theta^T W) + (-base))`` with its standard error.

    Exact (Steiner or vertex-sum hull) when possible, hit-or-miss otherwise.
    """
    proj = geo.project_rotated(window, theta, k)
    refl = geo.reflect(base)
    exact = geo.minkowski_volume(proj, refl)
    if exact is not None:
        return exact, 0.0
    return geo.minkowski_volume_mc(proj, refl, n_mc, as_generator(rng))


def capacity_analytic(cfg, body, n_mark_samples, rng):
    """``1 - exp(-gamma E vol(P(Theta^T C) + Xi*))`` with propagated s.e.

    A ball ``C`` with a rotation-invariant built-in law is evaluated exactly
    (Steiner); otherwise the expectation is averaged over sampled marks.
    """
    law = cfg.law
    if isinstance(body, geo.Ball) and not law.degenerate:
        e = math.fsum(p * geo.steiner_ball_sum_volume(b, body.radius)
                      for p, b in law.base_atoms())
        return Estimate(-math.expm1(-cfg.gamma * e), 0.0, "steiner")
    g = as_generator(rng)
    vals = np.empty(n_mark_samples)
    inner = np.empty(n_mark_samples)
    for i in range(n_mark_samples):
        theta, base = sample_mark(law, cfg.d, cfg.k, g)
        vals[i], inner[i] = hitting_measure(body, theta, base, cfg.k, g)
    e = float(vals.mean())
    se_e = math.sqrt(vals.var(ddof=1) / n_mark_samples
                     + np.sum(inner ** 2) / n_mark_samples ** 2)
    t = -math.expm1(-cfg.gamma * e)
    return Estimate(t, cfg.gamma * math.exp(-cfg.gamma * e) * se_e, "mc-marks")
