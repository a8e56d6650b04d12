"""Mean intrinsic volumes of the union set inside a window.

Two independent evaluations of ``E V_j(Z cap W)`` are provided for
``j >= k``: the alternating series over nested index chains and its closed
form in which the series has been summed.  Both need a rotation-invariant
mark law.

Notation: ``m_i = E V_i(Xi)`` (zero for negative ``i``) and
``c_r^p = p! kappa_p / (r! kappa_r)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import geometry as geo
from .errors import JBelowK, TruncationNotConverged, UnsupportedBody
from .sampling import moment

__all__ = [
    "MeanValueResult", "mean_volume", "mean_intrinsic_dminus1",
    "mean_intrinsic_closed", "mean_intrinsic_series", "base_moments",
    "composition_sum", "write_csv",
]

CSV_COLUMNS = ("d", "k", "j", "gamma", "form", "value", "tail_estimate")


@dataclass(frozen=True)
class MeanValueResult:
    """A mean value and how it was obtained.

    ``form`` is ``"general_series"``, ``"closed_jk"`` or ``"specialization"``;
    only the series form carries truncation information.
    """

    value: float
    form: str
    truncation_level: int | None = None
    tail_estimate: float | None = None

    def __float__(self):
        return float(self.value)

    def to_row(self, cfg, j):
        tail = "" if self.tail_estimate is None else repr(self.tail_estimate)
        return [cfg.d, cfg.k, j, repr(cfg.gamma), self.form, repr(self.value), tail]


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        w.writerows(rows)


def base_moments(cfg):
    """``[m_0, ..., m_{d-k}]`` for the configured law."""
    return [moment(cfg.law, i) for i in range(cfg.n + 1)]


def _window_iv(window, lo):
    vs = geo.intrinsic_volumes(window)
    for t in range(lo, len(vs)):
        if vs[t] is None:
            raise UnsupportedBody(
                f"V_{t} of the window is needed but not available")
    return vs


def _check_j(cfg, j):
    if not 0 <= j <= cfg.d:
        raise ValueError(f"j must lie in 0..{cfg.d}")
    if j < cfg.k:
        raise JBelowK(f"mean-value formulas need j >= k (got j={j}, k={cfg.k})")


def _q_factor(cfg, ms, q):
    """``c_d^{d-q} m_{d-k-q}`` (zero when ``q > d-k``)."""
    if q > cfg.n:
        return 0.0
    return geo.c_constant(cfg.d, cfg.d - q) * ms[cfg.n - q]


def composition_sum(cfg, total, parts):
    """Sum over compositions ``q_1 + ... + q_parts = total`` (``q_i > 0``) of
    ``prod c_d^{d-q_i} m_{d-k-q_i}``."""
    ms = base_moments(cfg)
    factors = [_q_factor(cfg, ms, q) for q in range(total + 1)]

    @lru_cache(maxsize=None)
    def rec(rest, p):
        if p == 0:
            return 1.0 if rest == 0 else 0.0
        return math.fsum(factors[q] * rec(rest - q, p - 1)
                         for q in range(1, rest - p + 2))

    return rec(total, parts)


def mean_volume(cfg, window):
    """``E lambda_d(Z cap W) = lambda_d(W) (1 - exp(-gamma m_{d-k}))``."""
    return geo.volume(window) * cfg.p


def mean_intrinsic_dminus1(cfg, window):
    """``E V_{d-1}(Z cap W)``."""
    n = cfg.n
    if n < 1:
        raise ValueError("need d - k >= 1")
    m_n = moment(cfg.law, n)
    m_n1 = moment(cfg.law, n - 1)
    e = math.exp(-cfg.gamma * m_n)
    return (cfg.gamma * geo.volume(window) * m_n1 * e
            + geo.intrinsic_volume(window, cfg.d - 1) * cfg.p)


def mean_intrinsic_closed(cfg, window, j):
    """Closed form of ``E V_j(Z cap W)`` for ``j >= k``."""
    _check_j(cfg, j)
    vs = _window_iv(window, j)
    e = math.exp(-cfg.gamma * moment(cfg.law, cfg.n))
    g = cfg.gamma
    outer = []
    for m in range(1, cfg.d - j + 1):
        inner = math.fsum((-1) ** p * g ** p / math.factorial(p)
                          * composition_sum(cfg, m, p) for p in range(1, m + 1))
        outer.append(geo.c_constant(j, m + j) * vs[m + j] * inner)
    value = vs[j] * cfg.p - e * math.fsum(outer)
    return MeanValueResult(value, "closed_jk")


def mean_intrinsic_series(cfg, window, j, l_max=40, tol=1e-8):
    """Partial sum of the alternating series for ``E V_j(Z cap W)``.

    Level ``l`` carries, for each final index ``t``, the sum over index
    chains ``j <= j_1 <= ... <= j_l = t`` with steps of at most ``d - k``;
    the chain weights are accumulated by dynamic programming with
    ``gamma^l / l!`` folded in to keep magnitudes bounded.
    """
    _check_j(cfg, j)
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    d, n = cfg.d, cfg.n
    vs = _window_iv(window, j)
    ms = base_moments(cfg)
    f = np.array([_q_factor(cfg, ms, q) for q in range(n + 1)])
    weights = np.array([geo.c_constant(j, t) * vs[t] if t >= j else 0.0
                        for t in range(d + 1)])
    v = np.zeros(d + 1)
    v[j] = 1.0
    terms = []
    for level in range(1, l_max + 1):
        nxt = np.zeros(d + 1)
        for s in range(j, d + 1):
            if v[s] == 0.0:
                continue
            top = min(d, s + n)
            nxt[s:top + 1] += v[s] * f[:top - s + 1]
        v = nxt * (cfg.gamma / level)
        terms.append((-1) ** (level - 1) * math.fsum(weights * v))
    value = math.fsum(terms)
    tail = abs(terms[-1])
    if tail > tol * abs(value):
        raise TruncationNotConverged(
            f"last term {tail:.3g} exceeds {tol:g} x |value| at l_max={l_max}")
    return MeanValueResult(value, "general_series", l_max, tail)
