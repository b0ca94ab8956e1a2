"""Constants and bound functions for the linear term of the minimal log energy.

``u(eps) = -1/4 + log eps - eps^2/8`` is the linear coefficient obtained from
``I(mu) >= 0``.  ``v(eps)`` adds the transport lower bound on ``N I(mu)``
through the Fejes Toth triangle integral, in its small-angle closed form

    v(eps) = 9/(2 pi^2) [C^3 C1/3 - C^2 C2 eps/2 + pi eps^3/36]^2,

with ``C = sqrt(2 pi / sqrt 3)``, ``C1 = int_0^{pi/6} sec^3`` and
``C2 = int_0^{pi/6} sec^2``.

The bracket above is the flat-metric triangle integral only while
``eps <= C``.  For ``C < eps < eps_max`` part of every Voronoi sector lies
inside the cap, where the integrand must vanish; the closed form instead
keeps a positive contribution there.  :func:`flat_triangle_bracket` clips
those directions and is what the triangle integrals use.  :func:`v` keeps
the unclipped bracket because it defines the stated constant ``C_tilde``;
:func:`v_clipped` and ``maximize_linear_coefficient(clipped=True)`` give
the value with the clipped integral.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .energy import I_SIGMA, KAPPA
from .geometry import GeometryError, triangle_for, voronoi_boundary_h
from .quadrature import integrate_1d_adaptive

C_TRI = math.sqrt(2.0 * math.pi / math.sqrt(3.0))
C1 = (2.0 + 3.0 * math.atanh(0.5)) / 6.0
C2 = 1.0 / math.sqrt(3.0)
EPS_MAX = math.sqrt(8.0 * math.pi / (3.0 * math.sqrt(3.0)))
V_COEFF = 9.0 / (2.0 * math.pi**2)
SEARCH_LO = 0.1


def u(eps: float) -> float:
    """Linear coefficient ``-1/4 + log eps - eps^2/8`` from positivity of ``I(mu)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return -0.25 + math.log(eps) - eps * eps / 8.0


def du(eps: float) -> float:
    return 1.0 / eps - eps / 4.0


def constants(check: bool = True) -> dict:
    """Closed-form constants; with ``check`` the integrals are re-derived by quadrature."""
    out = {
        "I_sigma": I_SIGMA,
        "kappa": KAPPA,
        "C": C_TRI,
        "C1": C1,
        "C2": C2,
        "eps_max": EPS_MAX,
    }
    if check:
        q1 = integrate_1d_adaptive(lambda t: 1.0 / math.cos(t) ** 3, 0.0, math.pi / 6)
        q2 = integrate_1d_adaptive(lambda t: 1.0 / math.cos(t) ** 2, 0.0, math.pi / 6)
        if abs(q1.value - C1) > 1e-10 or abs(q2.value - C2) > 1e-10:
            raise ArithmeticError("C1/C2 closed forms disagree with quadrature")
        if abs(EPS_MAX - C_TRI / math.cos(math.pi / 6)) > 1e-14:
            raise ArithmeticError("eps_max != C / cos(pi/6)")
    return out


def unclipped_bracket(eps: float) -> float:
    """Unclipped ``C^3 C1/3 - C^2 C2 eps/2 + pi eps^3/36``."""
    return C_TRI**3 * C1 / 3.0 - C_TRI**2 * C2 * eps / 2.0 + math.pi * eps**3 / 36.0


def v(eps: float) -> float:
    """Transport gain per unit ``N`` from the closed-form bracket; 0 from ``eps_max`` on."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= EPS_MAX:
        return 0.0
    return V_COEFF * unclipped_bracket(eps) ** 2


def v_valid(eps: float) -> bool:
    """Whether ``v(eps)`` is evaluated (``0 < eps < eps_max``) rather than clamped."""
    return 0.0 < eps < EPS_MAX


def dv(eps: float) -> float:
    if eps >= EPS_MAX:
        return 0.0
    return 2.0 * V_COEFF * unclipped_bracket(eps) * (-C_TRI**2 * C2 / 2.0 + math.pi * eps**2 / 12.0)


def _sec3_antiderivative(t: float) -> float:
    s, c = math.sin(t), math.cos(t)
    return 0.5 * (s / c**2 + math.log((1.0 + s) / c))


def _clip_angle(eps: float) -> float:
    """Smallest sector angle whose edge distance ``C / cos(theta)`` exceeds ``eps``."""
    return math.acos(C_TRI / eps) if eps > C_TRI else 0.0


def flat_triangle_bracket(eps: float) -> float:
    """``int_0^{pi/6} int_eps^{C/cos t} s (s - eps)^+ ds dt`` in closed form.

    Equal to :func:`unclipped_bracket` for ``eps <= C``; decreases to 0 at
    ``eps_max``.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps >= EPS_MAX:
        return 0.0
    t0, t1 = _clip_angle(eps), math.pi / 6.0
    sec3 = _sec3_antiderivative(t1) - _sec3_antiderivative(t0)
    sec2 = math.tan(t1) - math.tan(t0)
    return C_TRI**3 / 3.0 * sec3 - C_TRI**2 * eps / 2.0 * sec2 + eps**3 / 6.0 * (t1 - t0)


def d_flat_triangle_bracket(eps: float) -> float:
    if eps >= EPS_MAX:
        return 0.0
    t0, t1 = _clip_angle(eps), math.pi / 6.0
    return -0.5 * (C_TRI**2 * (math.tan(t1) - math.tan(t0)) - eps**2 * (t1 - t0))


def v_clipped(eps: float) -> float:
    """``v`` built from the clipped flat triangle integral; continuous at ``eps_max``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return V_COEFF * flat_triangle_bracket(eps) ** 2


def dv_clipped(eps: float) -> float:
    return 2.0 * V_COEFF * flat_triangle_bracket(eps) * d_flat_triangle_bracket(eps)


def c_bhs() -> float:
    """Conjectured value ``2 log 2 + log(2/3)/2 + 3 log(sqrt(pi)/Gamma(1/3))``."""
    return 2.0 * math.log(2.0) + 0.5 * math.log(2.0 / 3.0) + 3.0 * (
        0.5 * math.log(math.pi) - math.lgamma(1.0 / 3.0))


def c_lauritsen() -> float:
    """Earlier lower bound ``log 2 - 3/4 = u(2)``."""
    return math.log(2.0) - 0.75


def c_tilde() -> float:
    """Improved lower bound ``log 2 - 3/4 + (3^{1/4} sqrt(2 pi)(2 + 3 atanh(1/2)) - 12)^2 / 162``."""
    inner = 3.0**0.25 * math.sqrt(2.0 * math.pi) * (2.0 + 3.0 * math.atanh(0.5)) - 12.0
    return c_lauritsen() + inner**2 / 162.0


def maximize_linear_coefficient(clipped: bool = False) -> tuple[float, float]:
    """Argmax and maximum of ``u + v`` on ``(0.1, eps_max)``.

    A bounded scalar search locates the peak, then the root of the analytic
    derivative is bracketed around it and solved by Brent's method.
    """
    vf, dvf = (v_clipped, dv_clipped) if clipped else (v, dv)
    total = lambda e: u(e) + vf(e)
    grid = np.linspace(SEARCH_LO, EPS_MAX, 401)[:-1]
    k = int(np.argmax([total(e) for e in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda e: -total(e), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    eps = float(res.x)
    deriv = lambda e: du(e) + dvf(e)
    a, b = max(lo, eps - 1e-3), min(hi, eps + 1e-3)
    if deriv(a) > 0 > deriv(b):
        eps = brentq(deriv, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return eps, total(eps)


def _ramp_moment(a: float, delta: float) -> float:
    """``int_a^{a + delta} (r - a) sin r dr`` without cancellation for small ``delta``."""
    # int_0^delta s sin(a + s) ds = sin a (delta sin delta - 2 sin^2(delta/2)) + cos a (sin delta - delta cos delta)
    if delta < 1e-2:
        d2 = delta * delta
        odd = delta * d2 * (1 / 3 - d2 * (1 / 30 - d2 * (1 / 840 - d2 / 45360)))
    else:
        odd = math.sin(delta) - delta * math.cos(delta)
    even = delta * math.sin(delta) - 2.0 * math.sin(0.5 * delta) ** 2
    return math.sin(a) * even + math.cos(a) * odd


def toth_triangle_integral(n: int, eps: float, mode: str = "exact") -> float:
    """``int_T Phi(d(x, {a, b, c})) d sigma`` with ``Phi(s) = max(s - eps/sqrt(n), 0)``.

    ``T`` is the equilateral triangle of area ``2 pi / (n - 2)`` and
    ``sigma`` is normalized to total mass 1.

    ``mode="exact"`` integrates over the true spherical triangle with the
    area element ``sin r dr dtheta`` (six half Voronoi cells).
    ``mode="small_angle"`` uses the flat element ``r dr`` and the
    asymptotic triangle, ``3 / (2 pi n^{3/2})`` times the clipped bracket.
    """
    if int(n) != n or n < 4:
        raise GeometryError(f"triangle integral needs integer n >= 4, got {n!r}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if mode == "small_angle":
        return 3.0 / (2.0 * math.pi * n**1.5) * flat_triangle_bracket(eps)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    tri = triangle_for(n)
    a = eps / math.sqrt(n)
    half = 0.5 * tri.interior_angle
    if a >= tri.circumradius:
        return 0.0

    def radial(theta):
        h = float(voronoi_boundary_h(theta, tri.side))
        if h <= a:
            return 0.0
        return _ramp_moment(a, h - a)

    # Phi vanishes for theta below the angle where h_theta = a
    t0 = 0.0
    if a > 0.5 * tri.side:
        t0 = math.acos(min(1.0, math.tan(0.5 * tri.side) / math.tan(a)))
    # the integrand is largest at theta = half, so this bounds the integral
    scale = radial(half) * (half - t0)
    est = integrate_1d_adaptive(radial, t0, half, tol=max(1e-12 * scale, 1e-300))
    return 6.0 / (4.0 * math.pi) * est.value


def fejes_toth_rhs(n: int, eps: float) -> float:
    """``(2n - 4)`` times the exact triangle integral."""
    return (2 * n - 4) * toth_triangle_integral(n, eps, "exact")


def plot_grid(eps_lo: float, eps_hi: float, steps: int) -> np.ndarray:
    """Rows ``(eps, u, v, u + v)`` on ``steps`` evenly spaced points of ``[eps_lo, eps_hi]``."""
    if not 0 < eps_lo < eps_hi:
        raise ValueError("need 0 < eps_lo < eps_hi")
    if steps < 2:
        raise ValueError("need at least two grid points")
    eps = np.linspace(eps_lo, eps_hi, int(steps))
    uu = np.array([u(e) for e in eps])
    vv = np.array([v(e) for e in eps])
    return np.column_stack([eps, uu, vv, uu + vv])


def grid_csv(rows: np.ndarray) -> str:
    """CSV text with header ``eps,u,v,total``, 17 significant digits, LF endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "u", "v", "total"])
    for row in rows:
        w.writerow([f"{x:.17g}" for x in row])
    return buf.getvalue()


@dataclass(frozen=True)
class BoundReport:
    """``u``, ``v`` and their sum at one ``eps`` plus the maximization and constants."""

    eps: float
    u: float
    v: float
    total: float
    eps_star: float
    total_star: float
    clipped_eps_star: float
    clipped_total_star: float
    v_clamped: bool
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(eps: float | None = None) -> BoundReport:
    """Evaluate the bound at ``eps`` (default: the maximizer)."""
    eps_star, total_star = maximize_linear_coefficient()
    ceps, ctotal = maximize_linear_coefficient(clipped=True)
    e = eps_star if eps is None else float(eps)
    uu, vv = u(e), v(e)
    consts = constants()
    consts.update(C_BHS=c_bhs(), C_tilde=c_tilde(), C_lauritsen=c_lauritsen())
    return BoundReport(e, uu, vv, uu + vv, eps_star, total_star, ceps, ctotal,
                       not v_valid(e), consts)
