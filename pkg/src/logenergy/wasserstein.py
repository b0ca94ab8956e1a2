"""Transport lower bounds around the smeared measure.

W1 itself is never computed.  The 1-Lipschitz witness
``f(x) = d(x, union of caps)`` vanishes on every cap, so
``int f d sigma <= W1(smeared, sigma)`` by Kantorovich-Rubinstein duality.
On the other side ``W1^2 <= 2 I(mu)``, so the check here is
``witness^2 <= 2 I(mu)`` with Monte Carlo error bars on both sides.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import fejes_toth_rhs
from .energy import SmearedMeasure, smeared_energy
from .geometry import as_configuration, distance_to_caps, distance_to_set, in_closed_hemisphere
from .quadrature import IntegralEstimate, integrate_sphere_mc, seed_sequence


def _radius(n: int, eps: float) -> float:
    a = eps / math.sqrt(n)
    if not 0 < a < math.pi:
        raise ValueError(f"cap radius eps/sqrt(N) = {a} must lie in (0, pi)")
    return a


def witness_integral(cfg, eps: float, n_samples: int = 10**6, seed=None, workers: int = 1) -> IntegralEstimate:
    """Monte Carlo mean over the sphere of the distance to the union of caps."""
    cfg = np.atleast_2d(np.asarray(cfg, dtype=float))
    a = _radius(cfg.shape[0], eps)
    return integrate_sphere_mc(lambda x: distance_to_caps(x, cfg, a), n_samples, seed, workers)


def kantorovich_lower_bound(cfg, eps: float, n_samples: int = 10**6, seed=None, workers: int = 1) -> float:
    """Certified (up to Monte Carlo error) lower bound on ``W1(smeared, sigma)``."""
    return witness_integral(cfg, eps, n_samples, seed, workers).value


@dataclass(frozen=True)
class TransportCheck:
    w1_lower: float
    stderr: float
    two_i_mu: float
    two_i_mu_stderr: float
    satisfied: bool

    def to_dict(self) -> dict:
        return asdict(self)


def gz_inequality_check(cfg, eps: float, n_samples: int = 10**6, seed=0, workers: int = 1,
                        pair_samples: int = 200_000) -> TransportCheck:
    """Compare ``witness^2`` with ``2 I(mu)``; satisfied within three propagated sigmas."""
    cfg = np.atleast_2d(np.asarray(cfg, dtype=float))
    ss = seed_sequence(seed)
    s_witness, s_energy = ss.spawn(2)
    w = witness_integral(cfg, eps, n_samples, s_witness, workers)
    im = smeared_energy(SmearedMeasure(cfg, eps), pair_samples, s_energy)
    lhs, rhs = w.value**2, 2.0 * im.value
    err = math.hypot(2.0 * w.value * w.error, 2.0 * im.error)
    return TransportCheck(w.value, w.error, rhs, 2.0 * im.error, bool(lhs <= rhs + 3.0 * err))


def fejes_toth_check(cfg, eps: float, n_samples: int = 10**6, seed=None, workers: int = 1) -> dict:
    """Fejes Toth inequality ``int Phi(d(x, cfg)) >= (2N - 4) int_T Phi`` with ``Phi(s) = (s - eps/sqrt N)^+``.

    Skipped (with a reason) when the points lie in a closed hemisphere or
    ``N < 4``.
    """
    cfg = as_configuration(cfg)
    n = cfg.shape[0]
    if n < 4:
        return {"skipped": True, "reason": "needs at least 4 points"}
    if in_closed_hemisphere(cfg):
        return {"skipped": True, "reason": "points lie in a closed hemisphere"}
    if eps < 0:
        raise ValueError("eps must be non-negative")
    # eps = 0 is allowed here: Phi is then the distance itself
    a = eps / math.sqrt(n)
    lhs = integrate_sphere_mc(lambda x: np.maximum(distance_to_set(x, cfg) - a, 0.0), n_samples, seed, workers)
    rhs = fejes_toth_rhs(n, eps)
    return {
        "skipped": False,
        "lhs": lhs.value,
        "lhs_stderr": lhs.error,
        "rhs": rhs,
        "satisfied": bool(lhs.value >= rhs - 3.0 * lhs.error),
    }
