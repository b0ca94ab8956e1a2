"""Points, distances, caps and equilateral triangles on the unit sphere.

Points are plain ``numpy`` arrays: a single point has shape ``(3,)`` and a
configuration has shape ``(N, 3)``.  Everything is measured in radians and
areas are normalized so the whole sphere has measure 1.

Triangle frame
--------------
The Voronoi-cell integrals place one vertex ``a`` of the equilateral triangle
at the north pole with the edge ``ab`` leaving along azimuth ``phi = 0``.
Polar angle ``theta`` around ``a`` is measured from that edge, so the
perpendicular bisector of ``ab`` is hit at geodesic distance ``h_theta`` with
``tan(h_theta) = tan(alpha / 2) / cos(theta)``.  Half a Voronoi cell is the
sector ``0 <= theta <= A / 2`` where ``A`` is the interior angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import ConvexHull, QhullError, cKDTree

UNIT_TOL = 1e-6


class GeometryError(ValueError):
    """Invalid geometric input (bad radius, coincident points, ...)."""


def unit_vector(v) -> np.ndarray:
    """Return ``v`` renormalized to unit length."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise GeometryError("cannot normalize a zero or non-finite vector")
    return v / norm


def as_configuration(points, check_distinct: bool = True) -> np.ndarray:
    """Validate and renormalize a point set into an ``(N, 3)`` array.

    Raises :class:`GeometryError` if fewer than two points are given or two
    points coincide.
    """
    x = unit_vector(np.atleast_2d(np.asarray(points, dtype=float)))
    if x.ndim != 2 or x.shape[1] != 3:
        raise GeometryError(f"expected shape (N, 3), got {x.shape}")
    if x.shape[0] < 2:
        raise GeometryError("a configuration needs at least two points")
    if check_distinct:
        d, _ = cKDTree(x).query(x, k=2)
        if np.any(d[:, 1] <= 0.0):
            raise GeometryError("configuration has coincident points")
    return x


def geodesic_distance(u, v):
    """Great-circle distance, ``atan2(|u x v|, u . v)``; broadcasts."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def chordal_distance(u, v):
    """Euclidean distance ``|u - v|`` in R^3; broadcasts."""
    return np.linalg.norm(np.asarray(u, dtype=float) - np.asarray(v, dtype=float), axis=-1)


def cap_measure(a: float) -> float:
    """Normalized area ``sin^2(a/2)`` of a cap with geodesic radius ``a``."""
    if not 0.0 < a <= math.pi:
        raise GeometryError(f"cap radius must lie in (0, pi], got {a!r}")
    return math.sin(0.5 * a) ** 2


@dataclass(frozen=True)
class SphericalCap:
    """Geodesic ball ``B(center, radius)``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", unit_vector(self.center))
        cap_measure(self.radius)

    @property
    def measure(self) -> float:
        return cap_measure(self.radius)

    def contains(self, x) -> np.ndarray:
        return geodesic_distance(x, self.center) <= self.radius


def distance_to_set(x, cfg) -> np.ndarray | float:
    """Geodesic distance from ``x`` (one point or ``(M, 3)``) to the nearest point of ``cfg``.

    The nearest point is found in chordal distance (same ordering), then the
    geodesic distance to it is recomputed with :func:`geodesic_distance`.
    """
    cfg = np.atleast_2d(np.asarray(cfg, dtype=float))
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    if cfg.shape[0] <= 8:
        d = geodesic_distance(xs[:, None, :], cfg[None, :, :]).min(axis=1)
    else:
        _, idx = cKDTree(cfg).query(xs)
        d = geodesic_distance(xs, cfg[idx])
    return float(d[0]) if single else d


def distance_to_caps(x, cfg, a: float):
    """Distance to the union of caps of radius ``a`` around ``cfg``.

    Equals ``max(d(x, cfg) - a, 0)``; this is 1-Lipschitz in geodesic distance.
    """
    if a <= 0:
        raise GeometryError("cap radius must be positive")
    return np.maximum(distance_to_set(x, cfg) - a, 0.0)


@dataclass(frozen=True)
class SphericalTriangle:
    """Equilateral geodesic triangle of area ``2 pi / (n - 2)`` (in steradians)."""

    n: int
    area: float
    interior_angle: float
    side: float
    degenerate: bool = False

    @property
    def excess(self) -> float:
        return 3.0 * self.interior_angle - math.pi

    def lhuilier_residual(self) -> float:
        if self.degenerate:
            return 0.0
        return abs(_lhuilier(self.side) - math.tan(math.pi / (2 * (self.n - 2))))

    @property
    def circumradius(self) -> float:
        """Distance from a vertex to the centroid (largest ``h_theta``)."""
        return voronoi_boundary_h(0.5 * self.interior_angle, self.side)


def _lhuilier(alpha):
    return math.sqrt(math.tan(0.75 * alpha) * math.tan(0.25 * alpha) ** 3)


def triangle_for(n: int) -> SphericalTriangle:
    """Equilateral spherical triangle used by the Fejes Toth bound for ``n`` points.

    The side is the root of L'Huilier's relation
    ``tan(pi / (2(n-2))) = sqrt(tan(3 alpha/4) tan^3(alpha/4))`` on
    ``(0, 2 pi / 3)``.  ``n = 3`` is the hemisphere: returned and flagged
    degenerate.
    """
    if int(n) != n or n < 3:
        raise GeometryError(f"triangle_for needs an integer n >= 3, got {n!r}")
    n = int(n)
    area = 2.0 * math.pi / (n - 2)
    angle = (area + math.pi) / 3.0
    if n == 3:
        return SphericalTriangle(n, area, angle, 2.0 * math.pi / 3.0, degenerate=True)

    target = math.tan(math.pi / (2 * (n - 2)))
    f = lambda s: _lhuilier(s) - target
    try:
        side = brentq(f, 1e-300, 2.0 * math.pi / 3.0 - 1e-15,
                      xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    except ValueError as exc:
        raise GeometryError(f"L'Huilier root not bracketed for n={n}") from exc
    # one Newton polish step
    h = 1e-7 * side
    slope = (f(side + h) - f(side - h)) / (2 * h)
    if slope > 0:
        polished = side - f(side) / slope
        if abs(f(polished)) < abs(f(side)):
            side = polished
    return SphericalTriangle(n, area, angle, side)


def voronoi_boundary_h(theta, alpha):
    """Distance from a vertex to the bisector of an adjacent edge along direction ``theta``."""
    return np.arctan(np.tan(0.5 * np.asarray(alpha)) / np.cos(theta))


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_uniform_sphere(seed=None, size: int | None = None) -> np.ndarray:
    """Uniform points on the sphere (normalized Gaussian vectors)."""
    rng = _rng(seed)
    shape = (3,) if size is None else (size, 3)
    g = rng.standard_normal(shape)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def frame(center) -> np.ndarray:
    """Rotation matrix whose third column is ``center``."""
    c = unit_vector(center)
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = unit_vector(np.cross(helper, c))
    e2 = np.cross(c, e1)
    return np.column_stack([e1, e2, c])


def sample_uniform_cap(cap: SphericalCap, seed=None, size: int | None = None) -> np.ndarray:
    """Uniform points in ``cap``: height uniform on ``[cos a, 1]``, azimuth uniform."""
    rng = _rng(seed)
    m = 1 if size is None else size
    # 1 - z drawn directly keeps small caps accurate
    one_minus_z = rng.random(m) * (2.0 * cap.measure)
    z = 1.0 - one_minus_z
    rho = np.sqrt(one_minus_z * (2.0 - one_minus_z))
    phi = rng.random(m) * (2.0 * math.pi)
    local = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    out = local @ frame(cap.center).T
    return out[0] if size is None else out


def in_closed_hemisphere(cfg, tol: float = 1e-12) -> bool:
    """True if all points lie in some closed hemisphere.

    Equivalent to the origin not being an interior point of the convex hull.
    """
    cfg = np.atleast_2d(np.asarray(cfg, dtype=float))
    if cfg.shape[0] < 4:
        return True
    try:
        hull = ConvexHull(cfg)
    except QhullError:
        return True
    # facet equations: normal . x + offset <= 0 inside
    return bool(np.any(hull.equations[:, 3] >= -tol))
