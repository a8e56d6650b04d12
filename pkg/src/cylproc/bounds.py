"""Chernoff-type tail bounds for volume and intrinsic volumes of ``Z cap W``.

Every bound has the form ``exp(inf_{s>=0} w(s) - r s)`` with a convex
exponent ``w``.  All bounds are returned as natural logarithms.

The generic exponents are expectations over the mark ``(Theta, Xi)``.  They
are evaluated through a :class:`MarkTable`, a finite list of weighted atoms
``(weight, h, V_*(base))`` where ``h = lambda_{d-k}(P(Theta^T W) + Xi*)``
(or its rotation average).  Three construction paths exist:

``steiner``
    ball windows; ``h`` is the Steiner polynomial of the base at radius R.
``rotational``
    windows with all needed intrinsic volumes; ``h`` is the rotation
    average ``sum_j kappa_j kappa_{d-j} / (C(d,j) kappa_d) V_j(W) V_{d-k-j}(base)``.
``mc``
    anything else; marks are sampled once and ``h`` is computed per mark.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammainc

from . import geometry as geo
from . import meanvalues as mv
from .errors import DomainError, JBelowK, NonFinite, UnboundedSupport, UnsupportedBody
from .process import hitting_measure
from .sampling import (
    as_generator, exp_moment, joint_moment, moment, psi, uniform_rotation,
)

__all__ = [
    "psi", "chernoff_optimize", "BoundParams", "BoundCurve", "LogBound",
    "MarkTable", "mark_table", "flag_coefficient", "volume_exponent",
    "volume_tail_bound", "rotated_base_params", "rotated_base_bound",
    "dilated_base_bound", "spherical_window_bound", "ball_ball_params",
    "ball_ball_bound", "kflat_bound", "intrinsic_beta_coeffs",
    "intrinsic_exponent", "intrinsic_tail_bound", "rotated_intrinsic_params",
    "rotated_intrinsic_bound", "closed_form_bound", "scaling_exponent_probe",
    "kappa_ratio_check", "poisson_tail_bound", "bound_curve",
]

S_START = 1e-6
S_CAP = 1e300


class LogBound(NamedTuple):
    value: float
    s_star: float
    se: float = 0.0
    path: str = "closed-form"


@dataclass(frozen=True)
class BoundParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"need alpha, beta > 0 (got {self.alpha}, {self.beta})")


def _tail_sign(tail):
    if tail == "upper":
        return 1.0
    if tail == "lower":
        return -1.0
    raise ValueError(f"tail must be 'upper' or 'lower', got {tail!r}")


# --------------------------------------------------------------------------
# optimizer
# --------------------------------------------------------------------------

def chernoff_optimize(w: Callable[[float], float], r: float, s_max_hint=None):
    """Minimise ``g(s) = w(s) - r s`` over ``s >= 0``.

    Parameters
    ----------
    w : callable
        Convex with ``w(0) = 0``.  Overflow (``inf``) is treated as a large
        value, which is safe for minimisation.
    r : float
        Deviation.
    s_max_hint : float, optional
        Upper limit for the bracket search.  When ``g`` keeps decreasing up
        to this limit the value there is returned.

    Returns
    -------
    s_star, log_bound : float
        Minimiser and ``g(s_star) <= 0``.
    """
    if r <= 0:
        return 0.0, 0.0
    cap = S_CAP if s_max_hint is None else float(s_max_hint)

    def g(s):
        v = w(s)
        if math.isnan(v):
            raise NonFinite(f"exponent is NaN at s={s}")
        return math.inf if v == math.inf else v - r * s

    s = min(S_START, cap)
    g1 = g(s)
    if g1 == math.inf:
        raise NonFinite("exponent overflows before a bracket was found")
    if g1 >= 0.0:
        lo, hi = 0.0, s
    else:
        lo, mid, g_mid = 0.0, s, g1
        while True:
            hi = min(2.0 * mid, cap)
            g_hi = g(hi)
            if g_hi >= g_mid or hi >= cap:
                break
            lo, mid, g_mid = mid, hi, g_hi
        if hi >= cap and g_hi < g_mid:
            return hi, g_hi
    res = minimize_scalar(g, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13 * hi, "maxiter": 500})
    s_star, g_star = float(res.x), float(res.fun)
    if g_star > 0.0:
        return 0.0, 0.0
    return s_star, g_star


def closed_form_bound(params: BoundParams, r, tail="upper"):
    """Log of ``exp(inf_s beta Psi(+-alpha s) - r s)`` in closed form.

    Upper: ``r/alpha - (beta + r/alpha) log(1 + r/(alpha beta))``.
    Lower: ``-r/alpha - (beta - r/alpha) log(1 - r/(alpha beta))`` for
    ``r < alpha beta``.
    """
    sign = _tail_sign(tail)
    a, b = params.alpha, params.beta
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return 0.0
    x = r / (a * b)
    if sign > 0:
        return r / a - (b + r / a) * math.log1p(x)
    if x >= 1.0:
        raise DomainError(f"lower tail needs r < alpha*beta = {a * b:.6g}")
    return -r / a - (b - r / a) * math.log1p(-x)


def poisson_tail_bound(lam, r):
    """Log of the Bennett-type Poisson upper-tail bound (reference overlay)."""
    return closed_form_bound(BoundParams(1.0, lam), r, "upper")


# --------------------------------------------------------------------------
# mark tables
# --------------------------------------------------------------------------

def flag_coefficient(d, j):
    """``kappa_j kappa_{d-j} / (C(d, j) kappa_d)``."""
    return math.exp(geo.log_unit_ball_volume(j) + geo.log_unit_ball_volume(d - j)
                    - geo.log_unit_ball_volume(d)) / math.comb(d, j)


@dataclass
class MarkTable:
    """Weighted atoms approximating the mark distribution.

    Attributes
    ----------
    weights, h, base_volume : ndarray
        Atom weights (summing to one), hitting measures and base volumes.
    base_iv : list of list
        Intrinsic volumes ``V_0..V_{d-k}`` of each atom's base (``None``
        where unknown).
    path : str
        ``"steiner"``, ``"rotational"`` or ``"mc"``.
    h_se : ndarray
        Inner standard error of each ``h`` (nonzero only for MC volumes).
    """

    weights: np.ndarray
    h: np.ndarray
    base_volume: np.ndarray
    base_iv: list
    path: str
    h_se: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.h_se is None:
            self.h_se = np.zeros_like(self.h)

    @property
    def stochastic(self):
        return self.path == "mc"

    def expectation_se(self, values):
        """Standard error of ``sum(weights * values)`` on the MC path."""
        if not self.stochastic:
            return 0.0
        n = len(values)
        return math.sqrt(np.var(values, ddof=1) / n) if n > 1 else math.inf


def _law_atoms(law):
    if law.degenerate:
        raise UnsupportedBody("a point base has no volume exponent; use kflat_bound")
    return law.base_atoms()


def mark_table(cfg, window, n_mc=4000, rng=None, path=None):
    """Build the mark table used by the generic exponents.

    Parameters
    ----------
    cfg : ProcessConfig
    window : convex body in R^d
    n_mc : int
        Number of sampled marks on the MC path.
    rng : seed or Generator
        Only used on the MC path.
    path : str, optional
        Force ``"steiner"``, ``"rotational"`` or ``"mc"``.
    """
    law = cfg.law
    atoms = _law_atoms(law)
    n, d = cfg.n, cfg.d
    if path is None:
        if isinstance(window, geo.Ball) and law.rotation_invariant:
            path = "steiner"
        else:
            wv = geo.intrinsic_volumes(window)
            ok = (law.rotation_invariant
                  and all(v is not None for v in wv[:n + 1])
                  and all(v is not None for _, b in atoms
                          for v in geo.intrinsic_volumes(b)))
            path = "rotational" if ok else "mc"
    if path in ("steiner", "rotational"):
        weights = np.array([p for p, _ in atoms], dtype=float)
        ivs = [geo.intrinsic_volumes(b) for _, b in atoms]
        vols = np.array([iv[n] for iv in ivs], dtype=float)
        if path == "steiner":
            if not isinstance(window, geo.Ball):
                raise ValueError("the Steiner path needs a ball window")
            h = [geo.steiner_ball_sum_volume(b, window.radius) for _, b in atoms]
        else:
            wv = geo.intrinsic_volumes(window)
            h = [math.fsum(flag_coefficient(d, j) * wv[j] * iv[n - j]
                           for j in range(n + 1)) for iv in ivs]
        return MarkTable(weights, np.array(h, dtype=float), vols, ivs, path)
    if path != "mc":
        raise ValueError(f"unknown path {path!r}")
    return _mc_table(cfg, window, n_mc, as_generator(rng))


def _mc_table(cfg, window, n_mc, g):
    law = cfg.law
    n = cfg.n
    try:
        body_iv = geo.intrinsic_volumes(law.body)
    except UnsupportedBody:
        body_iv = [None] * (n + 1)
    h = np.empty(n_mc)
    h_se = np.empty(n_mc)
    vols = np.empty(n_mc)
    ivs = []
    for i in range(n_mc):
        theta = uniform_rotation(cfg.d, g)
        radius = law.radius_law.sample(g)
        base = geo.scale(law.body, radius)
        if not isinstance(base, geo.Ball):
            base = geo.rotate(base, uniform_rotation(n, g))
        h[i], h_se[i] = hitting_measure(window, theta, base, cfg.k, g)
        iv = [None if v is None else v * radius ** q for q, v in enumerate(body_iv)]
        ivs.append(iv)
        vols[i] = geo.volume(base)
    return MarkTable(np.full(n_mc, 1.0 / n_mc), h, vols, ivs, "mc", h_se)


# --------------------------------------------------------------------------
# volume bounds
# --------------------------------------------------------------------------

def _volume_terms(cfg, window, table, s, sign):
    scale = geo.diameter(window) ** cfg.k
    return (cfg.p / cfg.base_volume) * table.h * psi(sign * s * table.base_volume * scale)


def volume_exponent(cfg, window, s, sign=1, table=None):
    """``(p/m_{d-k}) E[h(Theta, Xi) Psi(sign s lambda_{d-k}(Xi) diam(W)^k)]``."""
    if table is None:
        table = mark_table(cfg, window)
    terms = _volume_terms(cfg, window, table, s, sign)
    return float(np.sum(table.weights * terms))


def _numeric_bound(terms_fn, table, r, tail, s_max_hint=None):
    sign = _tail_sign(tail)

    def w(s):
        with np.errstate(over="ignore", invalid="ignore"):
            t = terms_fn(s, sign)
            if np.any(np.isinf(t)):
                return math.inf
            return float(np.sum(table.weights * t))

    s_star, g = chernoff_optimize(w, r, s_max_hint)
    se = table.expectation_se(terms_fn(s_star, sign)) if s_star > 0 else 0.0
    return LogBound(g, s_star, se, table.path)


def volume_tail_bound(cfg, window, r, tail="upper", table=None, full=False):
    """Log tail bound for ``F = lambda_d(Z cap W)`` by numeric optimisation.

    The lower tail is trivial (0) for ``r`` above ``E F``.

    Parameters
    ----------
    table : MarkTable, optional
        Reuse a precomputed table, e.g. from the MC path.
    full : bool
        Return a :class:`LogBound` with minimiser, s.e. and path.
    """
    if table is None:
        table = mark_table(cfg, window)
    if tail == "lower" and r > mv.mean_volume(cfg, window):
        out = LogBound(0.0, 0.0, 0.0, table.path)
    else:
        out = _numeric_bound(
            lambda s, sg: _volume_terms(cfg, window, table, s, sg), table, r, tail)
    return out if full else out.value


def rotated_base_params(M, window, cfg):
    """``alpha = lambda(M) diam(W)^k`` and the rotation-averaged ``beta``."""
    d, k = cfg.d, cfg.k
    n = d - k
    if M.dim != n:
        raise ValueError("M must live in R^{d-k}")
    vol_m = geo.volume(M)
    alpha = vol_m * geo.diameter(window) ** k
    total = math.fsum(flag_coefficient(d, j) * geo.intrinsic_volume(window, j)
                      * geo.intrinsic_volume(M, n - j) for j in range(n + 1))
    return BoundParams(alpha, cfg.p / vol_m * total)


def rotated_base_bound(params: BoundParams, r, tail="upper"):
    """Closed-form log bound for bases that are random rotations of ``M``."""
    return closed_form_bound(params, r, tail)


def dilated_base_bound(M, window, cfg, r, tail="upper"):
    """Log bound for bases ``U(R M)`` with a finite-support radius law.

    Optimises ``(p/m) sum_j coef_j V_j(W) V_{d-k-j}(M) E[R^{d-k-j}
    Psi(+-s alpha R^{d-k})] - r s`` with ``alpha = lambda(M) diam(W)^k``.
    """
    law = cfg.law
    if not hasattr(law, "radius_law"):
        raise UnboundedSupport("law has no radius distribution")
    d, k, n = cfg.d, cfg.k, cfg.n
    sign = _tail_sign(tail)
    if tail == "lower" and r > mv.mean_volume(cfg, window):
        return 0.0
    alpha = geo.volume(M) * geo.diameter(window) ** k
    coefs = [flag_coefficient(d, j) * geo.intrinsic_volume(window, j)
             * geo.intrinsic_volume(M, n - j) for j in range(n + 1)]
    pre = cfg.p / cfg.base_volume

    def w(s):
        with np.errstate(over="ignore"):
            v = pre * math.fsum(c * exp_moment(law, n - j, sign * s * alpha)
                                for j, c in enumerate(coefs))
        return math.inf if not math.isfinite(v) else v

    return chernoff_optimize(w, r)[1]


def spherical_window_bound(cfg, R_window, r, tail="upper"):
    """Log bound for a ball window of radius ``R_window``.

    Optimises the Steiner sum ``(p/m) sum_j R^{d-k-j} kappa_{d-k-j}
    E[V_j(Xi) Psi(+-s lambda(Xi) (2R)^k)] - r s`` using joint moments.
    """
    sign = _tail_sign(tail)
    d, k, n = cfg.d, cfg.k, cfg.n
    law = cfg.law
    if tail == "lower" and r > mv.mean_volume(cfg, geo.Ball.centered(d, R_window)):
        return 0.0
    pre = cfg.p / cfg.base_volume
    scale = (2.0 * R_window) ** k
    coefs = [R_window ** (n - j) * geo.unit_ball_volume(n - j) for j in range(n + 1)]

    def w(s):
        with np.errstate(over="ignore"):
            v = pre * math.fsum(c * joint_moment(law, j, sign * s * scale)
                                for j, c in enumerate(coefs))
        return math.inf if not math.isfinite(v) else v

    return chernoff_optimize(w, r)[1]


def ball_ball_params(R, rho, cfg):
    """Constants ``(a, b)`` for a ball window and deterministic ball bases."""
    n, k = cfg.n, cfg.k
    kap = geo.unit_ball_volume(n)
    a = kap * rho ** n * (2.0 * R) ** k
    b = cfg.p / cfg.base_volume * kap * R ** n * (1.0 + rho / R) ** n
    return BoundParams(a, b)


def ball_ball_bound(R, rho, cfg, r, tail="upper"):
    return closed_form_bound(ball_ball_params(R, rho, cfg), r, tail)


def kflat_bound(cfg, window, r):
    """Upper-tail log bound for the k-content of a union of isotropic k-flats.

    ``-(r / 2b) log(1 + b r / a^2)`` with ``b = (diam/2)^k kappa_k`` and
    ``a = gamma kappa_k^3 kappa_{d-k} / (C(d,k) kappa_d) (diam/2)^{2k}
    V_{d-k}(W)``.
    """
    if not getattr(cfg.law, "degenerate", False):
        raise ValueError("kflat_bound needs a point base law")
    if r < 0:
        raise ValueError("r must be nonnegative")
    d, k = cfg.d, cfg.k
    half = geo.diameter(window) / 2.0
    kk = geo.unit_ball_volume(k)
    b = half ** k * kk
    a = (cfg.gamma * kk ** 3 * geo.unit_ball_volume(d - k)
         / (math.comb(d, k) * geo.unit_ball_volume(d))
         * half ** (2 * k) * geo.intrinsic_volume(window, d - k))
    if r == 0:
        return 0.0
    return -(r / (2.0 * b)) * math.log1p(b * r / (a * a))


# --------------------------------------------------------------------------
# intrinsic-volume bounds
# --------------------------------------------------------------------------

def _check_jk(cfg, j):
    if not 1 <= j <= cfg.d:
        raise ValueError(f"j must lie in 1..{cfg.d}")
    if j < cfg.k:
        raise JBelowK(f"intrinsic-volume bounds need j >= k (got j={j}, k={cfg.k})")


def intrinsic_beta_coeffs(cfg, j):
    """Coefficients ``beta_0, ..., beta_{d-j}`` of the intrinsic-volume exponent.

    ``beta_0 = p / m_{d-k}``, ``beta_1 = 0``, and for ``m >= 2`` a
    prefactor in ``kappa`` and binomials times a sum over even part counts
    ``2p <= m`` of ``m_{d-k}^{-2p-1}`` times a truncated-exponential tail
    ``1 - e^{-x} sum_{i<=2p} x^i / i!`` (``x = gamma m_{d-k}``) times the
    composition sum.
    """
    _check_jk(cfg, j)
    d = cfg.d
    m_n = cfg.base_volume
    x = cfg.gamma * m_n
    out = [cfg.p / m_n]
    if d - j >= 1:
        out.append(0.0)
    lk = geo.log_unit_ball_volume
    for m in range(2, d - j + 1):
        log_pre = ((1 + m / j) * lk(d - j) + math.log(math.comb(d, j + m))
                   + math.log(geo.c_constant(j, m + j)) - (m / j) * lk(d)
                   - lk(d - j - m) - (1 + m / j) * math.log(math.comb(d, j)))
        acc = []
        for p in range(1, m // 2 + 1):
            q = 2 * p
            # regularised lower incomplete gamma P(q+1, x) = 1 - e^{-x} sum_{i<=q} x^i/i!
            tail = float(gammainc(q + 1, x))
            acc.append(m_n ** (-q - 1) * tail * mv.composition_sum(cfg, m, q))
        out.append(math.exp(log_pre) * math.fsum(acc))
    return out


def _A(cfg, diam, j, iv):
    k = cfg.k
    lo, hi = j - k, min(cfg.n, j)
    return math.fsum(diam ** (j - i) * math.comb(k, j - i) * iv[i]
                     for i in range(lo, hi + 1))


def _intrinsic_factors(cfg, window, j, table):
    betas = intrinsic_beta_coeffs(cfg, j)
    diam = geo.diameter(window)
    lo, hi = j - cfg.k, min(cfg.n, j)
    for iv in table.base_iv:
        if any(iv[i] is None for i in range(lo, hi + 1)):
            raise UnsupportedBody("base intrinsic volumes needed for A(Xi) are unavailable")
    a = np.array([_A(cfg, diam, j, iv) for iv in table.base_iv])
    poly = np.array([math.fsum(b * ai ** (m / j) for m, b in enumerate(betas))
                     for ai in a])
    return a, table.h * poly


def intrinsic_exponent(cfg, window, j, s, sign=1, table=None):
    """``E[h Psi(sign s A(Xi)) sum_m beta_m A(Xi)^{m/j}]``."""
    if table is None:
        table = mark_table(cfg, window)
    a, fac = _intrinsic_factors(cfg, window, j, table)
    return float(np.sum(table.weights * fac * psi(sign * s * a)))


def intrinsic_tail_bound(cfg, window, j, r, tail="upper", table=None, full=False):
    """Log tail bound for ``V_j(Z cap W)``, ``j >= k``.

    ``A(K) = sum_{i=j-k}^{min(d-k, j)} diam(W)^{j-i} C(k, j-i) V_i(K)``
    bounds ``V_j`` of a single cylinder inside ``W``.
    """
    _check_jk(cfg, j)
    if table is None:
        table = mark_table(cfg, window)
    if tail == "lower" and r > mv.mean_intrinsic_closed(cfg, window, j).value:
        out = LogBound(0.0, 0.0, 0.0, table.path)
    else:
        a, fac = _intrinsic_factors(cfg, window, j, table)
        out = _numeric_bound(lambda s, sg: fac * psi(sg * s * a), table, r, tail)
    return out if full else out.value


def rotated_intrinsic_params(M, window, cfg, j):
    _check_jk(cfg, j)
    d, n = cfg.d, cfg.n
    iv = geo.intrinsic_volumes(M)
    alpha = _A(cfg, geo.diameter(window), j, iv)
    betas = intrinsic_beta_coeffs(cfg, j)
    poly = math.fsum(b * alpha ** (m / j) for m, b in enumerate(betas))
    rot = math.fsum(flag_coefficient(d, i) * geo.intrinsic_volume(window, i)
                    * geo.intrinsic_volume(M, n - i) for i in range(n + 1))
    return BoundParams(alpha, rot * poly)


def rotated_intrinsic_bound(M, window, cfg, j, r, tail="upper"):
    """Closed-form intrinsic-volume bound for randomly rotated bases ``M``."""
    return closed_form_bound(rotated_intrinsic_params(M, window, cfg, j), r, tail)


# --------------------------------------------------------------------------
# asymptotics and checks
# --------------------------------------------------------------------------

def scaling_exponent_probe(M, window, cfg, r_grid, j=None):
    """Fitted exponent of ``-log bound`` for the growing window ``r^{1/d} W``.

    At each deviation ``r`` the window is scaled by ``r^{1/d}`` and the
    closed-form rotated bound (volume when ``j`` is None, else ``V_j``) is
    evaluated; the slope of ``log(-log bound)`` against ``log r`` is
    returned.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.max() / r_grid.min() < 100:
        raise ValueError("r-grid must span at least two decades")
    d = cfg.d
    ys = []
    for r in r_grid:
        w_r = geo.scale(window, r ** (1.0 / d))
        if j is None:
            params = rotated_base_params(M, w_r, cfg)
        else:
            params = rotated_intrinsic_params(M, w_r, cfg, j)
        ys.append(math.log(-closed_form_bound(params, r, "upper")))
    slope, _ = np.polyfit(np.log(r_grid), ys, 1)
    return float(slope)


def kappa_ratio_check(d, k):
    """Whether ``kappa_{d-k}^d / kappa_d^{d-k} >= 1`` (up to 1e-12)."""
    if not 0 <= k <= d - 1:
        raise ValueError("need 0 <= k <= d-1")
    log_ratio = d * geo.log_unit_ball_volume(d - k) - (d - k) * geo.log_unit_ball_volume(d)
    return bool(math.exp(log_ratio) >= 1.0 - 1e-12)


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------

BOUND_CSV_COLUMNS = ("r", "log_upper", "log_lower", "path", "se")


@dataclass
class BoundCurve:
    r_grid: np.ndarray
    log_upper_bound: np.ndarray
    log_lower_bound: np.ndarray
    path: str = "closed-form"
    se: np.ndarray = None

    def __post_init__(self):
        if self.se is None:
            self.se = np.zeros(len(self.r_grid))

    def rows(self):
        for r, u, lo, se in zip(self.r_grid, self.log_upper_bound,
                                self.log_lower_bound, self.se):
            yield [repr(float(r)), repr(float(u)),
                   "" if math.isnan(lo) else repr(float(lo)), self.path,
                   repr(float(se))]

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(BOUND_CSV_COLUMNS)
        w.writerows(self.rows())
        return out.getvalue() if fh is None else None

    def to_dict(self):
        nan_none = lambda a: [None if math.isnan(x) else float(x) for x in a]
        return {
            "r": [float(x) for x in self.r_grid],
            "log_upper": nan_none(self.log_upper_bound),
            "log_lower": nan_none(self.log_lower_bound),
            "path": self.path,
            "se": [float(x) for x in self.se],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def bound_curve(fn, r_grid, path="closed-form"):
    """Evaluate ``fn(r, tail)`` on a grid; undefined lower-tail points are NaN.

    ``fn`` may return a float or a :class:`LogBound`.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    up, lo, se = [], [], []
    for r in r_grid:
        u = fn(r, "upper")
        if isinstance(u, LogBound):
            path = u.path
            se.append(u.se)
            u = u.value
        else:
            se.append(0.0)
        up.append(u)
        try:
            v = fn(r, "lower")
            lo.append(v.value if isinstance(v, LogBound) else v)
        except DomainError:
            lo.append(math.nan)
    return BoundCurve(r_grid, np.array(up), np.array(lo), path, np.array(se))
