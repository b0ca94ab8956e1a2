"""Closed forms against independent oracles, as a pass/fail table."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds
from .energy import I_SIGMA, KAPPA, cap_cross_energy_disjoint, cap_self_energy
from .geometry import SphericalCap
from .quadrature import (
    cap_pair_energy_quadrature,
    cap_pair_energy_series,
    integrate_1d_adaptive,
    integrate_sphere_mc,
)

SELF_RADII = (0.05, 0.1, 0.5, 1.0, math.pi / 2, math.pi)


@dataclass
class Check:
    name: str
    value: float
    reference: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _abs(name, value, reference, tol):
    return Check(name, value, reference, tol, bool(abs(value - reference) <= tol))


def _sigma(name, est, reference, k=3.0):
    tol = k * est.error
    return Check(name, est.value, reference, tol, bool(abs(est.value - reference) <= tol))


def printed_self_energy(a: float) -> float:
    """Same-cap integral in the ``log|x - y|`` convention, exactly as usually printed."""
    c = 1.0 / math.tan(a / 2) ** 2
    return -KAPPA + math.log(math.sin(a / 2)) + c * (0.5 + c * math.log(math.cos(a / 2)))


def run_checks(samples: int = 10**6, seed: int = 0, workers: int = 1, sign_flip: bool = False) -> list[Check]:
    """Run the oracle suite.  ``sign_flip`` negates the self-energy as a negative control."""
    streams = iter(np.random.SeedSequence(seed).spawn(64))
    self_energy = (lambda a: -cap_self_energy(a)) if sign_flip else cap_self_energy
    out = []

    q1 = integrate_1d_adaptive(lambda t: 1.0 / math.cos(t) ** 3, 0.0, math.pi / 6)
    q2 = integrate_1d_adaptive(lambda t: 1.0 / math.cos(t) ** 2, 0.0, math.pi / 6)
    out.append(_abs("C1 closed form vs adaptive quadrature", bounds.C1, q1.value, 1e-10))
    out.append(_abs("C2 closed form vs adaptive quadrature", bounds.C2, q2.value, 1e-10))
    out.append(_abs("eps_max = C / cos(pi/6)", bounds.EPS_MAX, bounds.C_TRI / math.cos(math.pi / 6), 1e-14))
    out.append(_abs("Gamma(1/3) Gamma(2/3) = 2 pi / sqrt 3",
                    math.gamma(1 / 3) * math.gamma(2 / 3), 2 * math.pi / math.sqrt(3), 1e-12))
    out.append(_abs("C_tilde - log2 + 3/4 = v(2)", bounds.c_tilde() - bounds.c_lauritsen(), bounds.v(2.0), 1e-10))

    north = np.array([0.0, 0.0, 1.0])
    pot = integrate_sphere_mc(lambda x: -np.log(np.linalg.norm(x - north, axis=1)),
                              samples, next(streams), workers)
    out.append(_sigma("potential of sigma = 1/2 - log 2 (MC)", pot, I_SIGMA))

    for a in SELF_RADII:
        cap = SphericalCap(north, a)
        mc = cap_pair_energy_quadrature(cap, cap, "log_inverse", samples, next(streams), workers)
        out.append(_sigma(f"cap self-energy a={a:.6g} vs MC", mc, self_energy(a)))
        ser = cap_pair_energy_series(0.0, a)
        out.append(_abs(f"cap self-energy a={a:.6g} vs Legendre series", ser.value, self_energy(a),
                        5 * ser.error + 1e-9))
        if a < math.pi:
            # the printed form cancels terms of size cot^4(a/2)
            tol = 1e-12 + 4e-16 / math.tan(a / 2) ** 4
            out.append(_abs(f"printed convention a={a:.6g}", -printed_self_energy(a), self_energy(a), tol))

    for d, a in ((1.0, 0.1), (0.5, 0.2), (2.5, 0.3)):
        other = np.array([math.sin(d), 0.0, math.cos(d)])
        mc = cap_pair_energy_quadrature(SphericalCap(north, a), SphericalCap(other, a),
                                        "log_inverse", samples, next(streams), workers)
        out.append(_sigma(f"disjoint cross energy d={d} a={a} vs MC", mc, cap_cross_energy_disjoint(d, a)))
    return out


def format_table(checks) -> str:
    width = max(len(c.name) for c in checks)
    lines = []
    for c in checks:
        flag = "PASS" if c.passed else "FAIL"
        lines.append(f"{flag}  {c.name:<{width}}  value={c.value:.12g}  ref={c.reference:.12g}  tol={c.tolerance:.3g}")
    return "\n".join(lines)
