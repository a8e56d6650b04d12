"""Convex bodies, intrinsic volumes and Minkowski-sum machinery.

Bodies are immutable.  Points are passed as arrays whose last axis is the
ambient dimension; membership and distance queries are vectorised over the
leading axes.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import (
    DegenerateBody,
    DimensionMismatch,
    InfeasibleTest,
    UnsupportedBody,
)

__all__ = [
    "Ball", "Box", "PolytopeV", "PolytopeH", "Rotation",
    "unit_ball_volume", "log_unit_ball_volume", "c_constant",
    "intrinsic_volume", "intrinsic_volumes", "volume", "diameter",
    "circumradius", "inradius", "contains", "distance", "bounding_box",
    "reflect", "translate", "scale", "rotate", "project_rotated",
    "steiner_ball_sum_volume", "minkowski_contains", "minkowski_volume",
    "minkowski_volume_mc", "min_norm_point", "hull_distance",
]

# residual tolerance for LP feasibility and hull membership
LP_TOL = 1e-9
# polytopes with larger affine rank are handled by LP instead of qhull
MAX_HULL_RANK = 5


# --------------------------------------------------------------------------
# constants
# --------------------------------------------------------------------------

def log_unit_ball_volume(n):
    return 0.5 * n * math.log(math.pi) - math.lgamma(1.0 + 0.5 * n)


def unit_ball_volume(n):
    """Volume of the unit ball in dimension ``n`` (``n = 0`` gives 1)."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    return math.exp(log_unit_ball_volume(n))


def c_constant(r, p):
    """``p! kappa_p / (r! kappa_r)``, evaluated in log space."""
    if r < 0 or p < 0:
        raise ValueError("indices must be nonnegative")
    if r == p:
        return 1.0
    lp = math.lgamma(p + 1.0) + log_unit_ball_volume(p)
    lr = math.lgamma(r + 1.0) + log_unit_ball_volume(r)
    return math.exp(lp - lr)


def _elementary_symmetric(values):
    e = np.zeros(len(values) + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1]
    return e


# --------------------------------------------------------------------------
# bodies
# --------------------------------------------------------------------------

def _as_vector(x, name):
    a = np.array(x, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(a)):
        raise DegenerateBody(f"{name} must be finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center, "center"))
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise DegenerateBody("ball radius must be positive")
        object.__setattr__(self, "radius", r)

    @classmethod
    def centered(cls, n, radius):
        return cls(np.zeros(n), radius)

    @property
    def dim(self):
        return self.center.size

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius!r})"


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box ``center + [-h_1, h_1] x ... x [-h_n, h_n]``."""

    center: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self):
        c = _as_vector(self.center, "center")
        h = _as_vector(self.half_extents, "half_extents")
        if c.size != h.size:
            raise DimensionMismatch("center and half_extents differ in length")
        if not np.all(h > 0):
            raise DegenerateBody("box half extents must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_extents", h)

    @classmethod
    def from_edges(cls, edges, center=None):
        edges = np.asarray(edges, dtype=float)
        if center is None:
            center = np.zeros(edges.size)
        return cls(center, edges / 2.0)

    @property
    def dim(self):
        return self.center.size

    @cached_property
    def vertices(self):
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
        return self.center + signs * self.half_extents

    def __repr__(self):
        return (f"Box(center={self.center.tolist()}, "
                f"half_extents={self.half_extents.tolist()})")


@dataclass(frozen=True, eq=False)
class PolytopeV:
    """Convex hull of a finite point set (possibly lower dimensional)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DegenerateBody("polytope needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise DegenerateBody("vertices must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @cached_property
    def _affine(self):
        """(origin, basis rows, coordinates in the affine hull)."""
        origin = self.vertices.mean(axis=0)
        x = self.vertices - origin
        if len(x) == 1:
            return origin, np.zeros((0, self.dim)), np.zeros((1, 0))
        _, s, vt = np.linalg.svd(x, full_matrices=False)
        tol = 1e-10 * max(s[0], 1e-300)
        rank = int(np.sum(s > tol))
        basis = vt[:rank]
        return origin, basis, x @ basis.T

    @property
    def affine_rank(self):
        return self._affine[1].shape[0]

    @cached_property
    def _hull(self):
        rank = self.affine_rank
        if rank < 2 or rank > MAX_HULL_RANK:
            return None
        return ConvexHull(self._affine[2])

    def __repr__(self):
        return f"PolytopeV({self.vertices.shape[0]} vertices in R^{self.dim})"


@dataclass(frozen=True, eq=False)
class PolytopeH:
    """Bounded nonempty intersection of halfspaces ``normal . x <= offset``."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        a = np.array(self.normals, dtype=float)
        b = np.array(self.offsets, dtype=float).ravel()
        if a.ndim != 2 or a.shape[0] != b.size or a.shape[1] < 1:
            raise DimensionMismatch("normals must be (m, n) with m offsets")
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms == 0):
            raise DegenerateBody("zero normal vector")
        a = a / norms[:, None]
        b = b / norms
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "normals", a)
        object.__setattr__(self, "offsets", b)
        center, r = _chebyshev(a, b)
        if r <= 0:
            raise DegenerateBody("halfspace region is empty or has no interior")
        object.__setattr__(self, "_interior_point", center)
        # bounded iff no direction of recession
        n = a.shape[1]
        for i in range(n):
            for sgn in (1.0, -1.0):
                c = np.zeros(n)
                c[i] = -sgn
                res = linprog(c, A_ub=a, b_ub=b, bounds=[(None, None)] * n,
                              method="highs")
                if res.status == 3:
                    raise DegenerateBody("halfspace region is unbounded")

    @property
    def dim(self):
        return self.normals.shape[1]

    def to_vrep(self):
        hs = np.hstack([self.normals, -self.offsets[:, None]])
        if self.dim == 1:
            lo = max((b / a[0] for a, b in zip(self.normals, self.offsets)
                      if a[0] < 0), default=-np.inf)
            hi = min((b / a[0] for a, b in zip(self.normals, self.offsets)
                      if a[0] > 0), default=np.inf)
            return PolytopeV([[lo], [hi]])
        inter = HalfspaceIntersection(hs, self._interior_point)
        return PolytopeV(inter.intersections)

    def __repr__(self):
        return f"PolytopeH({self.normals.shape[0]} halfspaces in R^{self.dim})"


def _chebyshev(a, b):
    """Chebyshev center and radius of ``{x : a x <= b}`` (rows of a unit)."""
    n = a.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([a, np.ones((a.shape[0], 1))])
    res = linprog(c, A_ub=a_ub, b_ub=b, bounds=[(None, None)] * n + [(0, None)],
                  method="highs")
    if res.status == 3:
        return np.zeros(n), np.inf
    if res.status != 0:
        return np.zeros(n), 0.0
    return res.x[:n], res.x[-1]


@dataclass(frozen=True, eq=False)
class Rotation:
    """Proper rotation matrix; orthonormality and ``det = +1`` are checked."""

    matrix: np.ndarray
    tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        q = np.array(self.matrix, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DimensionMismatch("rotation matrix must be square")
        err = np.max(np.abs(q.T @ q - np.eye(q.shape[0])))
        if err > self.tol:
            raise ValueError(f"matrix is not orthogonal (error {err:.2e})")
        if abs(np.linalg.det(q) - 1.0) > self.tol:
            raise ValueError("rotation must have determinant +1")
        q.setflags(write=False)
        object.__setattr__(self, "matrix", q)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def is_identity(self):
        return bool(np.array_equal(self.matrix, np.eye(self.dim)))


Body = (Ball, Box, PolytopeV, PolytopeH)


def _vertices(body):
    if isinstance(body, Box):
        return body.vertices
    if isinstance(body, PolytopeV):
        return body.vertices
    if isinstance(body, PolytopeH):
        raise UnsupportedBody("convert PolytopeH with to_vrep() first")
    raise UnsupportedBody(f"{type(body).__name__} has no vertex list")


# --------------------------------------------------------------------------
# intrinsic volumes and simple functionals
# --------------------------------------------------------------------------

def _polytope_intrinsic_volumes(p):
    """Intrinsic volumes of a V-polytope; ``None`` where no formula is used."""
    n = p.dim
    rank = p.affine_rank
    out = [None] * (n + 1)
    out[0] = 1.0
    for j in range(rank + 1, n + 1):
        out[j] = 0.0
    if rank == 0:
        return out
    coords = p._affine[2]
    if rank == 1:
        out[1] = float(coords.max() - coords.min())
        return out
    hull = p._hull
    if hull is None:
        raise UnsupportedBody("polytope rank too high for hull computation")
    out[rank] = float(hull.volume)
    # qhull's area is the boundary measure in the affine hull
    out[rank - 1] = 0.5 * float(hull.area)
    return out


def intrinsic_volumes(body):
    """List ``[V_0, ..., V_n]``; entries without a closed form are ``None``."""
    n = body.dim
    if isinstance(body, Ball):
        r = body.radius
        return [math.comb(n, j) * math.exp(log_unit_ball_volume(n)
                                           - log_unit_ball_volume(n - j)) * r ** j
                for j in range(n + 1)]
    if isinstance(body, Box):
        return [float(v) for v in _elementary_symmetric(2.0 * body.half_extents)]
    if isinstance(body, PolytopeV):
        return _polytope_intrinsic_volumes(body)
    if isinstance(body, PolytopeH):
        return _polytope_intrinsic_volumes(body.to_vrep())
    raise UnsupportedBody(f"unknown body type {type(body).__name__}")


def intrinsic_volume(body, j):
    """The ``j``-th intrinsic volume of ``body``.

    Closed forms exist for balls and boxes.  For polytopes only ``V_0``, the
    volume and half the boundary measure are computed (in the affine hull,
    so any order is available for polytopes of affine rank at most two);
    other orders raise :class:`UnsupportedBody`.
    """
    if not 0 <= j <= body.dim:
        raise ValueError(f"order {j} outside 0..{body.dim}")
    v = intrinsic_volumes(body)[j]
    if v is None:
        raise UnsupportedBody(
            f"V_{j} of {type(body).__name__} in R^{body.dim} is not implemented")
    return v


def volume(body):
    return intrinsic_volume(body, body.dim)


def diameter(body):
    if isinstance(body, Ball):
        return 2.0 * body.radius
    if isinstance(body, Box):
        return float(2.0 * np.linalg.norm(body.half_extents))
    if isinstance(body, PolytopeV):
        v = body.vertices
        if len(v) == 1:
            return 0.0
        if len(v) > 2000 and body._hull is not None:
            v = body.vertices[body._hull.vertices]
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))
    raise UnsupportedBody("diameter needs a V-representation")


def circumradius(body, about=None):
    """Radius of the smallest ball centred at ``about`` (default 0) containing body."""
    about = np.zeros(body.dim) if about is None else np.asarray(about, float)
    if isinstance(body, Ball):
        return float(np.linalg.norm(body.center - about) + body.radius)
    if isinstance(body, Box):
        far = np.abs(body.center - about) + body.half_extents
        return float(np.linalg.norm(far))
    if isinstance(body, PolytopeH):
        body = body.to_vrep()
    return float(np.max(np.linalg.norm(body.vertices - about, axis=1)))


def inradius(body):
    if isinstance(body, Ball):
        return body.radius
    if isinstance(body, Box):
        return float(body.half_extents.min())
    if isinstance(body, PolytopeH):
        return float(_chebyshev(body.normals, body.offsets)[1])
    if isinstance(body, PolytopeV):
        if body.affine_rank < body.dim:
            return 0.0
        if body.dim == 1:
            return 0.5 * float(np.ptp(body.vertices))
        eq = body._hull.equations
        # hull equations live in the affine coordinates (full rank here)
        a = eq[:, :-1] @ body._affine[1]
        b = -eq[:, -1] + a @ body._affine[0]
        norms = np.linalg.norm(a, axis=1)
        return float(_chebyshev(a / norms[:, None], b / norms)[1])
    raise UnsupportedBody(type(body).__name__)


def bounding_box(body):
    """(lower, upper) corners of the axis-aligned bounding box."""
    if isinstance(body, Ball):
        return body.center - body.radius, body.center + body.radius
    if isinstance(body, Box):
        return body.center - body.half_extents, body.center + body.half_extents
    if isinstance(body, PolytopeH):
        body = body.to_vrep()
    return body.vertices.min(axis=0), body.vertices.max(axis=0)


# --------------------------------------------------------------------------
# transformations
# --------------------------------------------------------------------------

def reflect(body):
    """Reflection ``-K`` at the origin."""
    if isinstance(body, Ball):
        return Ball(-body.center, body.radius)
    if isinstance(body, Box):
        return Box(-body.center, body.half_extents)
    if isinstance(body, PolytopeV):
        return PolytopeV(-body.vertices)
    if isinstance(body, PolytopeH):
        return PolytopeH(-body.normals, body.offsets)
    raise UnsupportedBody(type(body).__name__)


def translate(body, v):
    v = np.asarray(v, dtype=float)
    if isinstance(body, Ball):
        return Ball(body.center + v, body.radius)
    if isinstance(body, Box):
        return Box(body.center + v, body.half_extents)
    if isinstance(body, PolytopeV):
        return PolytopeV(body.vertices + v)
    if isinstance(body, PolytopeH):
        return PolytopeH(body.normals, body.offsets + body.normals @ v)
    raise UnsupportedBody(type(body).__name__)


def scale(body, c):
    """Dilation ``c K`` about the origin; ``c = 0`` collapses to a point."""
    c = float(c)
    if c < 0:
        raise ValueError("dilation factor must be nonnegative")
    if c == 0:
        return PolytopeV(np.zeros((1, body.dim)))
    if isinstance(body, Ball):
        return Ball(c * body.center, c * body.radius)
    if isinstance(body, Box):
        return Box(c * body.center, c * body.half_extents)
    if isinstance(body, PolytopeV):
        return PolytopeV(c * body.vertices)
    if isinstance(body, PolytopeH):
        return PolytopeH(body.normals, c * body.offsets)
    raise UnsupportedBody(type(body).__name__)


def _matrix(q):
    return q.matrix if isinstance(q, Rotation) else np.asarray(q, dtype=float)


def rotate(body, q):
    """Image ``Q K`` of the body under a rotation."""
    m = _matrix(q)
    if isinstance(body, Ball):
        return Ball(m @ body.center, body.radius)
    if isinstance(body, PolytopeH):
        return PolytopeH(body.normals @ m.T, body.offsets)
    return PolytopeV(_vertices(body) @ m.T)


def project_rotated(body, theta, k):
    """``P_{d-k}(theta^T K)``: rotate back by theta, keep the first d-k coordinates."""
    d = body.dim
    m = _matrix(theta)
    if m.shape != (d, d):
        raise DimensionMismatch("rotation and body dimensions differ")
    if not 0 <= k <= d - 1:
        raise ValueError("need 0 <= k <= d-1")
    n = d - k
    identity = np.array_equal(m, np.eye(d))
    if isinstance(body, Ball):
        c = body.center if identity else m.T @ body.center
        return Ball(c[:n], body.radius)
    if isinstance(body, Box) and identity:
        return Box(body.center[:n], body.half_extents[:n])
    if isinstance(body, PolytopeV) and identity and k == 0:
        return body
    v = _vertices(body)
    return PolytopeV((v @ m)[:, :n])


# --------------------------------------------------------------------------
# membership and distance
# --------------------------------------------------------------------------

def _points(body, pts):
    p = np.asarray(pts, dtype=float)
    if p.shape[-1] != body.dim:
        raise DimensionMismatch(
            f"points have dimension {p.shape[-1]}, body has {body.dim}")
    return p


def _polytope_contains(body, p, tol=LP_TOL):
    origin, basis, coords = body._affine
    flat = p.reshape(-1, body.dim) - origin
    y = flat @ basis.T
    resid = flat - y @ basis
    scl = max(1.0, float(np.abs(body.vertices).max()))
    inside = np.linalg.norm(resid, axis=1) <= tol * scl
    rank = basis.shape[0]
    if rank == 0:
        pass
    elif rank == 1:
        inside &= (y[:, 0] >= coords.min() - tol * scl) & (y[:, 0] <= coords.max() + tol * scl)
    elif body._hull is not None:
        eq = body._hull.equations
        inside &= np.all(y @ eq[:, :-1].T + eq[:, -1] <= tol * scl, axis=1)
    else:
        for i in np.flatnonzero(inside):
            inside[i] = _lp_in_hull(body.vertices, flat[i] + origin)
    return inside.reshape(p.shape[:-1])


def _lp_in_hull(vertices, z):
    m = len(vertices)
    a_eq = np.vstack([vertices.T, np.ones((1, m))])
    b_eq = np.append(z, 1.0)
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m,
                  method="highs")
    if res.status == 2:
        return False
    if res.status != 0:
        raise InfeasibleTest(res.message)
    return bool(np.max(np.abs(a_eq @ res.x - b_eq)) <= LP_TOL * max(1.0, np.abs(z).max()))


def contains(body, points):
    """Boolean membership, vectorised over the leading axes of ``points``."""
    p = _points(body, points)
    if isinstance(body, Ball):
        return np.sum((p - body.center) ** 2, axis=-1) <= body.radius ** 2
    if isinstance(body, Box):
        return np.all(np.abs(p - body.center) <= body.half_extents, axis=-1)
    if isinstance(body, PolytopeH):
        return np.all(p @ body.normals.T <= body.offsets + LP_TOL, axis=-1)
    if isinstance(body, PolytopeV):
        return _polytope_contains(body, p)
    raise UnsupportedBody(type(body).__name__)


def min_norm_point(points, tol=1e-12, max_iter=500):
    """Point of minimal Euclidean norm in the convex hull of ``points``.

    Wolfe's algorithm (1976): alternate between adding the vertex with the
    most negative inner product and projecting onto the affine hull of the
    current corral.
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    if m == 1:
        return pts[0].copy()
    sq = np.einsum("ij,ij->i", pts, pts)
    scl = max(float(sq.max()), 1e-300)
    corral = [int(np.argmin(sq))]
    w = np.array([1.0])
    x = pts[corral[0]].copy()
    for _ in range(max_iter):
        dots = pts @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scl or j in corral:
            break
        corral.append(j)
        w = np.append(w, 0.0)
        for _ in range(len(pts) + 5):
            q = pts[corral]
            v = _affine_min_weights(q)
            if np.all(v > 1e-14):
                w = v
                break
            neg = v <= 1e-14
            ratios = np.full(len(v), np.inf)
            ratios[neg] = w[neg] / (w[neg] - v[neg])
            drop = int(np.argmin(ratios))
            theta = min(1.0, ratios[drop])
            w = theta * v + (1.0 - theta) * w
            keep = np.ones(len(w), dtype=bool)
            keep[drop] = False
            keep &= w > 1e-15
            if not keep.any():
                keep[int(np.argmax(w))] = True
            corral = [c for c, kflag in zip(corral, keep) if kflag]
            w = w[keep]
            w = w / w.sum()
        x = w @ pts[corral]
    return x


def _affine_min_weights(q):
    """Weights ``v`` with ``sum v = 1`` minimising ``|v @ q|``."""
    k = len(q)
    g = q @ q.T
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = g
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def hull_distance(vertices, z):
    """Euclidean distance from ``z`` to ``conv(vertices)``."""
    v = np.asarray(vertices, dtype=float)
    return float(np.linalg.norm(min_norm_point(v - np.asarray(z, float))))


def distance(body, points):
    """Distance from each point to the body (zero inside)."""
    p = _points(body, points)
    if isinstance(body, Ball):
        d = np.linalg.norm(p - body.center, axis=-1) - body.radius
        return np.maximum(d, 0.0)
    if isinstance(body, Box):
        u = np.maximum(np.abs(p - body.center) - body.half_extents, 0.0)
        return np.linalg.norm(u, axis=-1)
    if isinstance(body, PolytopeH):
        body = body.to_vrep()
    if isinstance(body, PolytopeV):
        flat = p.reshape(-1, body.dim)
        inside = _polytope_contains(body, flat)
        out = np.zeros(len(flat))
        for i in np.flatnonzero(~inside):
            out[i] = hull_distance(body.vertices, flat[i])
        return out.reshape(p.shape[:-1])
    raise UnsupportedBody(type(body).__name__)


# --------------------------------------------------------------------------
# Minkowski sums
# --------------------------------------------------------------------------

def steiner_ball_sum_volume(body, rho):
    """Volume of ``body + B_rho`` by the Steiner polynomial."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    n = body.dim
    vs = intrinsic_volumes(body)
    terms = []
    for j, vj in enumerate(vs):
        if n - j > 0 and rho == 0:
            continue
        if vj is None:
            raise UnsupportedBody(
                f"Steiner formula needs V_{j} of {type(body).__name__}")
        terms.append(rho ** (n - j) * unit_ball_volume(n - j) * vj)
    return math.fsum(terms)


def _is_point(body):
    return isinstance(body, PolytopeV) and body.affine_rank == 0


def minkowski_contains(a, b, z):
    """Whether each point ``z`` lies in ``a + b``.

    Balls reduce to a distance test, single points to plain membership, and
    two polytopes/boxes to an LP in the joint convex-combination weights.
    """
    if a.dim != b.dim:
        raise DimensionMismatch("summands differ in dimension")
    z = _points(a, z)
    if _is_point(b):
        return contains(a, z - b.vertices[0])
    if _is_point(a):
        return contains(b, z - a.vertices[0])
    if isinstance(a, Ball) and not isinstance(b, Ball):
        a, b = b, a
    if isinstance(b, Ball):
        tol = 1e-12 * max(1.0, b.radius)
        return distance(a, z - b.center) <= b.radius + tol
    if isinstance(a, PolytopeH):
        a = a.to_vrep()
    if isinstance(b, PolytopeH):
        b = b.to_vrep()
    va, vb = _vertices(a), _vertices(b)
    flat = z.reshape(-1, a.dim)
    out = np.array([_lp_minkowski(va, vb, zi) for zi in flat], dtype=bool)
    return out.reshape(z.shape[:-1])


def _lp_minkowski(va, vb, z):
    ma, mb = len(va), len(vb)
    n = va.shape[1]
    a_eq = np.zeros((n + 2, ma + mb))
    a_eq[:n, :ma] = va.T
    a_eq[:n, ma:] = vb.T
    a_eq[n, :ma] = 1.0
    a_eq[n + 1, ma:] = 1.0
    b_eq = np.concatenate([z, [1.0, 1.0]])
    res = linprog(np.zeros(ma + mb), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * (ma + mb), method="highs")
    if res.status == 2:
        return False
    if res.status != 0:
        raise InfeasibleTest(res.message)
    resid = np.max(np.abs(a_eq @ res.x - b_eq))
    return bool(resid <= LP_TOL * max(1.0, float(np.abs(z).max())))


def minkowski_volume(a, b):
    """Exact volume of ``a + b`` when a closed route exists, else ``None``.

    A ball summand uses the Steiner polynomial of the other body; two
    polytopes use the hull of pairwise vertex sums (affine rank <= 5).
    """
    if a.dim != b.dim:
        raise DimensionMismatch("summands differ in dimension")
    if isinstance(a, Ball) and not isinstance(b, Ball):
        a, b = b, a
    try:
        if isinstance(b, Ball):
            return steiner_ball_sum_volume(a, b.radius)
        if isinstance(a, PolytopeH):
            a = a.to_vrep()
        if isinstance(b, PolytopeH):
            b = b.to_vrep()
        va, vb = _vertices(a), _vertices(b)
        pts = (va[:, None, :] + vb[None, :, :]).reshape(-1, a.dim)
        return volume(PolytopeV(pts))
    except (UnsupportedBody, QhullError):
        return None


def minkowski_volume_mc(a, b, n_samples, rng):
    """Hit-or-miss estimate of ``vol(a + b)`` with its binomial standard error.

    Points are drawn uniformly from the sum of the two bounding boxes and
    tested with :func:`minkowski_contains`.
    """
    if a.dim != b.dim:
        raise DimensionMismatch("summands differ in dimension")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    lo_a, hi_a = bounding_box(a)
    lo_b, hi_b = bounding_box(b)
    lo, hi = lo_a + lo_b, hi_a + hi_b
    box_vol = float(np.prod(hi - lo))
    if not np.isfinite(box_vol):
        raise DegenerateBody("summand is unbounded")
    if box_vol == 0.0:
        return 0.0, 0.0
    z = lo + (hi - lo) * rng.random((int(n_samples), a.dim))
    frac = float(np.mean(minkowski_contains(a, b, z)))
    se = box_vol * math.sqrt(frac * (1.0 - frac) / n_samples)
    return box_vol * frac, se
