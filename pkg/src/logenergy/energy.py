"""Discrete logarithmic energy and the smeared-measure decomposition.

Sign convention: ``G(x, y) = log(1 / |x - y|)`` everywhere.  The classical
closed form for the same-cap integral is usually printed for the kernel
``log|x - y|``; :func:`cap_self_energy` returns its negative.

For points ``x_1 .. x_N`` and caps ``B_i = B(x_i, a)`` with ``a = eps / sqrt(N)``
the smeared measure is ``mu = (1/N) sum_i mu_i - sigma``.  Because the
potential of ``sigma`` is constant,

    N^2 I(mu) = sum_{i != j} M_ij + N S(a) - N^2 I(sigma)

with ``S`` the cap self-energy and ``M_ij`` the cap-pair energy.  Since
``M_ij <= G(x_i, x_j) + corr(a)`` (equality for disjoint caps) this gives
the exact finite-N inequality

    E(x) >= N^2 I(sigma) + N^2 I(mu) - N S(a) - N (N - 1) corr(a).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .geometry import GeometryError, SphericalCap, as_configuration, geodesic_distance
from .quadrature import IntegralEstimate, cap_pair_energy_quadrature, seed_sequence

I_SIGMA = 0.5 - math.log(2.0)
KAPPA = I_SIGMA
SERIES_RADIUS = 1e-2


class CoincidentPointsError(GeometryError):
    """Two points coincide, so the logarithmic energy is infinite."""


def _chords(cfg: np.ndarray) -> np.ndarray:
    d = pdist(cfg)
    if np.any(d <= 0.0):
        raise CoincidentPointsError("coincident points: energy is +inf")
    return d


def pair_energy(cfg) -> float:
    """``sum_{i != j} log(1/|x_i - x_j|)`` over ordered pairs."""
    cfg = np.asarray(cfg, dtype=float)
    return -2.0 * float(np.sum(np.log(_chords(cfg))))


def energy_and_gradient(cfg: np.ndarray) -> tuple[float, np.ndarray]:
    """Energy and tangent (Riemannian) gradient in one pass."""
    diff = cfg[:, None, :] - cfg[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, 1.0)
    if np.any(d2 <= 0.0):
        raise CoincidentPointsError("coincident points: energy is +inf")
    energy = -0.5 * float(np.sum(np.log(d2)))
    egrad = -2.0 * np.einsum("ijk,ij->ik", diff, 1.0 / d2)
    radial = np.sum(egrad * cfg, axis=1, keepdims=True)
    return energy, egrad - radial * cfg


def riemannian_gradient(cfg) -> np.ndarray:
    """Euclidean gradient ``-2 sum_j (x_i - x_j)/|x_i - x_j|^2`` projected to each tangent plane."""
    return energy_and_gradient(np.asarray(cfg, dtype=float))[1]


def continuous_energy() -> float:
    """Energy ``I(sigma) = 1/2 - log 2`` of the normalized surface measure."""
    return I_SIGMA


def _cot2(a):
    return 1.0 / math.tan(0.5 * a) ** 2


def _cot2_log_cos(a):
    """``cot^2(a/2) log cos(a/2)``, which tends to 0 at ``a = pi``."""
    h = 0.5 * a
    s2 = math.sin(h) ** 2
    if s2 < 0.5:
        return _cot2(a) * 0.5 * math.log1p(-s2)
    c = math.cos(h)
    if c <= 0.0:
        return 0.0
    return c * c / s2 * math.log(c)


def cap_self_energy(a: float) -> float:
    """``int int log(1/|x-y|)`` for ``x, y`` uniform in one cap of radius ``a``.

    Below ``a = 1e-2`` the series
    ``-log a + 1/4 + a^2/12 - a^4/1920 - 19 a^6/362880 - ...`` replaces the
    closed form, whose ``cot^2`` terms cancel badly.
    """
    if not 0.0 < a <= math.pi:
        raise GeometryError(f"cap radius must lie in (0, pi], got {a!r}")
    if a < SERIES_RADIUS:
        a2 = a * a
        return (-math.log(a) + 0.25 + a2 * (1 / 12 + a2 * (-1 / 1920 + a2 * (
            -19 / 362880 + a2 * (-19 / 9676800 - a2 / 22809600)))))
    c = _cot2(a)
    return KAPPA - math.log(math.sin(0.5 * a)) - c * (0.5 + _cot2_log_cos(a))


def cap_correction(a: float) -> float:
    """``1 + 2 cot^2(a/2) log cos(a/2)``, the smearing excess of two disjoint caps (about ``a^2/8``)."""
    if not 0.0 < a <= math.pi:
        raise GeometryError(f"cap radius must lie in (0, pi], got {a!r}")
    if a < SERIES_RADIUS:
        a2 = a * a
        return a2 * (1 / 8 + a2 * a2 * (-1 / 11520 + a2 * (-1 / 161280 - a2 / 2764800)))
    return 1.0 + 2.0 * _cot2_log_cos(a)


def cap_cross_energy_disjoint(d: float, a: float) -> float:
    """Exact energy between two disjoint caps of radius ``a`` whose centres are ``d`` apart."""
    if d <= 2.0 * a:
        raise GeometryError(f"caps overlap (d={d} <= 2a={2 * a}); use quadrature")
    return -math.log(2.0 * math.sin(0.5 * d)) + cap_correction(a)


@dataclass(frozen=True)
class SmearedMeasure:
    """``(1/N) sum_i mu_i - sigma`` with caps of radius ``eps / sqrt(N)``."""

    config: np.ndarray
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "config", np.atleast_2d(np.asarray(self.config, dtype=float)))
        if self.eps <= 0:
            raise GeometryError("eps must be positive")
        if not self.radius < math.pi:
            raise GeometryError(f"cap radius {self.radius} must be < pi")

    @property
    def n(self) -> int:
        return self.config.shape[0]

    @property
    def radius(self) -> float:
        return self.eps / math.sqrt(self.n)


def _overlap_energy(d: float, a: float, n_samples: int, seed) -> IntegralEstimate:
    north = np.array([0.0, 0.0, 1.0])
    other = np.array([math.sin(d), 0.0, math.cos(d)])
    return cap_pair_energy_quadrature(SphericalCap(north, a), SphericalCap(other, a),
                                      "log_inverse", n_samples, seed)


def cross_sum(cfg: np.ndarray, a: float, n_samples: int = 200_000, seed=0) -> tuple[float, float]:
    """``sum_{i != j} M_ij`` and its Monte Carlo standard error.

    Disjoint pairs use the exact formula; each overlapping unordered pair gets
    its own substream of ``seed``.
    """
    if cfg.shape[0] < 2:
        return 0.0, 0.0
    d = _pair_geodesics(cfg)
    disjoint = d > 2.0 * a
    total = 0.0
    if np.any(disjoint):
        dd = d[disjoint]
        total += float(np.sum(-np.log(2.0 * np.sin(0.5 * dd)))) + dd.size * cap_correction(a)
    var = 0.0
    overlap = np.flatnonzero(~disjoint)
    if overlap.size:
        streams = seed_sequence(seed).spawn(overlap.size)
        for k, s in zip(overlap, streams):
            est = _overlap_energy(float(d[k]), a, n_samples, s)
            total += est.value
            var += est.error**2
    # unordered pairs counted once above
    return 2.0 * total, 2.0 * math.sqrt(var)


def _pair_geodesics(cfg: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(cfg.shape[0], k=1)
    return geodesic_distance(cfg[i], cfg[j])


def smeared_energy(m: SmearedMeasure, n_samples: int = 200_000, seed=0) -> IntegralEstimate:
    """``I(mu)`` with a standard error coming from overlapping cap pairs.

    Uses ``N^2 I(mu) = sum_{i != j} M_ij + N S(a) - N^2 I(sigma)``.  A single
    point is allowed here (``N = 1``).
    """
    n, a = m.n, m.radius
    cross, cross_err = cross_sum(m.config, a, n_samples, seed)
    value = (cross + n * cap_self_energy(a)) / n**2 - I_SIGMA
    return IntegralEstimate(value, cross_err / n**2, "exact" if cross_err == 0 else "mc", n_samples)


@dataclass(frozen=True)
class EnergyBreakdown:
    """All pieces of the decomposition inequality for one configuration."""

    n: int
    eps: float
    radius: float
    pair_sum: float
    self_terms: float
    cross_terms: float
    cross_error: float
    smeared: float
    smeared_error: float
    kappa: float
    rhs: float
    slack: float

    def to_dict(self) -> dict:
        return asdict(self)


def decomposition_lower_bound(cfg, eps: float, n_samples: int = 200_000, seed=0) -> EnergyBreakdown:
    """Evaluate ``E >= N^2 I(sigma) + N^2 I(mu) - N S(a) - N(N-1) corr(a)``.

    ``slack = E - rhs`` equals ``sum_{i != j} (G_ij + corr - M_ij)``: zero when
    every pair of caps is disjoint and positive otherwise.
    """
    cfg = as_configuration(cfg)
    m = SmearedMeasure(cfg, eps)
    n, a = m.n, m.radius
    e = pair_energy(cfg)
    cross, cross_err = cross_sum(cfg, a, n_samples, seed)
    self_terms = n * cap_self_energy(a)
    smeared = (cross + self_terms) / n**2 - I_SIGMA
    rhs = n**2 * I_SIGMA + n**2 * smeared - self_terms - n * (n - 1) * cap_correction(a)
    return EnergyBreakdown(
        n=n, eps=eps, radius=a, pair_sum=e, self_terms=self_terms, cross_terms=cross,
        cross_error=cross_err, smeared=smeared, smeared_error=cross_err / n**2,
        kappa=KAPPA, rhs=rhs, slack=e - rhs,
    )


def decomposition_floor(n: int, eps: float) -> float:
    """Lower bound on the minimal energy for ``n`` points from ``I(mu) >= 0``."""
    a = eps / math.sqrt(n)
    return n**2 * I_SIGMA - n * cap_self_energy(a) - n * (n - 1) * cap_correction(a)
