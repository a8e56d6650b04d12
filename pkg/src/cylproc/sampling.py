"""Random streams, Haar rotations and the base-direction laws.

Every built-in law is an independent product: a Haar direction in SO(d)
and a base ``U(R M)`` with ``U`` Haar in SO(d-k) and ``R`` drawn from a
finite-support radius law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import geometry as geo
from .errors import CircumradiusViolation, UnboundedSupport, DimensionMismatch

__all__ = [
    "RngStream", "as_generator", "uniform_rotation", "poisson_count",
    "ConstantRadius", "DiscreteRadius", "RotatedFixed", "RotatedDilated",
    "DeterministicBall", "PointBase", "sample_mark", "moment", "exp_moment",
    "joint_moment", "psi",
]

STREAM_STRIDE = 2 ** 32


@dataclass(frozen=True)
class RngStream:
    """Identifies one reproducible random stream.

    Streams are keyed Philox generators; ``(seed, stream_id)`` pairs that
    differ give independent sequences.
    """

    seed: int
    stream_id: int = 0

    def generator(self):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def replicate(self, r):
        """Stream of replicate ``r`` of the experiment this stream names."""
        return RngStream(self.seed, self.stream_id * STREAM_STRIDE + int(r))


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def psi(x):
    """``exp(x) - x - 1`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.expm1(x) - x
    small = np.abs(x) < 1e-4
    if np.any(small):
        xs = x[small] if out.ndim else x
        series = xs * xs * (0.5 + xs * (1.0 / 6.0 + xs / 24.0))
        if out.ndim:
            out[small] = series
        else:
            out = series
    return out if out.ndim else float(out)


def uniform_rotation(n, rng):
    """Haar-distributed element of SO(n).

    Gaussian matrix, QR with the signs of ``diag(R)`` moved into ``Q``, then a
    column flip when the determinant is negative.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    if n == 1:
        return geo.Rotation(np.ones((1, 1)))
    g = as_generator(rng)
    q, r = np.linalg.qr(g.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return geo.Rotation(q)


def poisson_count(mean, rng):
    if mean < 0 or mean >= 1e9:
        raise ValueError("Poisson mean must lie in [0, 1e9)")
    if mean == 0:
        return 0
    return int(as_generator(rng).poisson(mean))


# --------------------------------------------------------------------------
# radius laws
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantRadius:
    value: float = 1.0

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError("radius must be finite and nonnegative")

    def atoms(self):
        return [(float(self.value), 1.0)]

    def sample(self, rng):
        return float(self.value)


@dataclass(frozen=True)
class DiscreteRadius:
    values: tuple
    probs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        if len(v) != len(p) or not v:
            raise ValueError("need matching, nonempty values and probabilities")
        if any(x < 0 or not math.isfinite(x) for x in v):
            raise ValueError("radius atoms must be finite and nonnegative")
        if any(x < 0 for x in p) or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_pairs(cls, pairs):
        values, probs = zip(*pairs)
        return cls(values, probs)

    def atoms(self):
        return list(zip(self.values, self.probs))

    def sample(self, rng):
        g = as_generator(rng)
        return self.values[int(g.choice(len(self.values), p=self.probs))]


RadiusLaw = Union[ConstantRadius, DiscreteRadius]


def _radius_moment(law, q):
    return math.fsum(p * v ** q for v, p in law.atoms() if p > 0)


# --------------------------------------------------------------------------
# base-direction laws
# --------------------------------------------------------------------------

class _RotatedLaw:
    """Shared behaviour: base ``U(R M)`` with Haar ``U`` and Haar direction."""

    rotation_invariant = True
    degenerate = False

    @property
    def body(self):
        raise NotImplementedError

    @property
    def radius_law(self):
        return ConstantRadius(1.0)

    @property
    def dim(self):
        return self.body.dim

    def default_r_max(self):
        rmax = max(v for v, p in self.radius_law.atoms() if p > 0)
        return rmax * geo.circumradius(self.body)

    @property
    def r_max(self):
        declared = getattr(self, "declared_r_max", None)
        return self.default_r_max() if declared is None else declared

    def base_atoms(self):
        """``[(probability, R M)]``; intrinsic volumes of ``U(R M)`` equal those of ``R M``."""
        return [(p, geo.scale(self.body, v))
                for v, p in self.radius_law.atoms() if p > 0]


@dataclass(frozen=True, eq=False)
class RotatedFixed(_RotatedLaw):
    """Base is a Haar-random rotation of the fixed body ``M``."""

    M: object
    declared_r_max: float | None = None

    @property
    def body(self):
        return self.M


@dataclass(frozen=True, eq=False)
class RotatedDilated(_RotatedLaw):
    M: object
    law: RadiusLaw = ConstantRadius(1.0)
    declared_r_max: float | None = None

    @property
    def body(self):
        return self.M

    @property
    def radius_law(self):
        return self.law


@dataclass(frozen=True, eq=False)
class DeterministicBall(_RotatedLaw):
    rho: float
    n: int
    declared_r_max: float | None = None

    @property
    def body(self):
        return geo.Ball.centered(self.n, self.rho)


@dataclass(frozen=True, eq=False)
class PointBase:
    """Degenerate base ``{0}``: the union set is a union of k-flats.

    Only the flat-process bound accepts it; it has no positive volume moment.
    """

    n: int
    rotation_invariant = True
    degenerate = True
    r_max = 0.0

    @property
    def dim(self):
        return self.n


def sample_mark(law, d, k, rng):
    """Draw ``(theta, base)``: theta Haar in SO(d), base ``U(R M)`` in R^{d-k}."""
    if law.dim != d - k:
        raise DimensionMismatch(f"law lives in R^{law.dim}, expected R^{d - k}")
    g = as_generator(rng)
    theta = uniform_rotation(d, g)
    if law.degenerate:
        return theta, geo.PolytopeV(np.zeros((1, d - k)))
    radius = law.radius_law.sample(g)
    u = uniform_rotation(d - k, g)
    base = geo.scale(law.body, radius)
    if not (isinstance(base, geo.Ball) and not base.center.any()):
        base = geo.rotate(base, u)
    if geo.circumradius(base) > law.r_max * (1 + 1e-9) + 1e-12:
        raise CircumradiusViolation(
            f"sampled base has circumradius {geo.circumradius(base):.6g} "
            f"> declared r_max {law.r_max:.6g}")
    return theta, base


def moment(law, i):
    """``E V_i(base)``; rotation invariance leaves ``V_i(M) E[R^i]``."""
    if not 0 <= i <= law.dim:
        raise ValueError(f"order {i} outside 0..{law.dim}")
    if law.degenerate:
        return 1.0 if i == 0 else 0.0
    return geo.intrinsic_volume(law.body, i) * _radius_moment(law.radius_law, i)


def exp_moment(law, i, c):
    """``E[R^i psi(c R^{d-k})]`` as a finite sum over the radius atoms."""
    if law.degenerate:
        raise UnboundedSupport("point base has no radius law")
    rl = law.radius_law
    if not isinstance(rl, (ConstantRadius, DiscreteRadius)):
        raise UnboundedSupport("exponential moments need a finite-support law")
    n = law.dim
    return math.fsum(p * v ** i * psi(c * v ** n) for v, p in rl.atoms() if p > 0)


def joint_moment(law, j, c):
    """``E[V_j(base) psi(c vol(base))]``."""
    lam = geo.volume(law.body)
    return geo.intrinsic_volume(law.body, j) * exp_moment(law, j, c * lam)
