"""Numerical integration oracles on the sphere and on intervals.

Two independent routes are provided so a closed form is never checked
against a single method: Monte Carlo with a standard error, and
deterministic rules (Gauss-Legendre products, adaptive 1-D quadrature,
a Legendre-series evaluation of cap potentials) with a refinement error.

Monte Carlo follows a partitioned-stream contract: ``workers`` substreams
are spawned from one master seed, each integrates its share of samples,
and the shares are merged by weighted average.  The result is reproducible
for a fixed ``(seed, workers)`` pair.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .geometry import SphericalCap, cap_measure, sample_uniform_cap, sample_uniform_sphere

CHUNK = 1 << 20
MIN_SEPARATION = 1e-15


class QuadratureError(RuntimeError):
    """An integration routine could not produce a finite, converged value."""


@dataclass(frozen=True)
class IntegralEstimate:
    """Integral value with a one-sigma standard error (Monte Carlo) or an error bound."""

    value: float
    error: float
    method: str
    samples: int

    def to_dict(self) -> dict:
        return asdict(self)

    def agrees(self, expected: float, k: float = 3.0) -> bool:
        return abs(self.value - expected) <= k * self.error


def seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, ``None``, a ``SeedSequence`` or a ``Generator``."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(2**63)))
    return np.random.SeedSequence(seed)


def _substreams(seed, workers: int):
    return [np.random.default_rng(s) for s in seed_sequence(seed).spawn(workers)]


def _split(n: int, workers: int) -> list[int]:
    base, extra = divmod(n, workers)
    return [base + (i < extra) for i in range(workers)]


def _moments(draw, n: int, rng) -> tuple[float, float, float, int]:
    """Shifted sum and sum of squares of ``draw(rng, m)`` over ``n`` samples, chunked."""
    total = 0.0
    total_sq = 0.0
    shift = None
    left = n
    while left > 0:
        m = min(CHUNK, left)
        vals = np.asarray(draw(rng, m), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = vals[~np.isfinite(vals)][0]
            raise QuadratureError(f"integrand returned a non-finite value ({bad})")
        if shift is None:
            shift = float(vals[0])
        vals = vals - shift
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        left -= m
    return total + n * shift, total_sq, shift, n


def mc_estimate(draw, n_samples: int, seed=None, workers: int = 1, method: str = "mc") -> IntegralEstimate:
    """Mean and standard error of ``draw(rng, m) -> m values`` over ``n_samples`` draws."""
    if n_samples < 2:
        raise ValueError("Monte Carlo needs at least two samples")
    workers = max(1, int(workers))
    rngs = _substreams(seed, workers)
    sizes = _split(n_samples, workers)
    jobs = [(rng, m) for rng, m in zip(rngs, sizes) if m > 0]
    if len(jobs) == 1:
        parts = [_moments(draw, jobs[0][1], jobs[0][0])]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(lambda j: _moments(draw, j[1], j[0]), jobs))
    n = sum(p[3] for p in parts)
    mean = sum(p[0] for p in parts) / n
    # pooled variance from per-stream shifted moments
    ss = 0.0
    for s, sq, shift, m in parts:
        part_mean = s / m
        ss += sq - m * (part_mean - shift) ** 2 + m * (part_mean - mean) ** 2
    var = max(ss / (n - 1), 0.0)
    return IntegralEstimate(mean, math.sqrt(var / n), method, n)


def integrate_sphere_mc(f, n_samples: int = 10**6, seed=None, workers: int = 1) -> IntegralEstimate:
    """Monte Carlo average of ``f`` over the sphere (total mass 1).

    ``f`` maps an ``(m, 3)`` array of points to ``m`` values.
    """
    return mc_estimate(lambda rng, m: f(sample_uniform_sphere(rng, m)), n_samples, seed, workers)


def _product_rule(f, n_polar: int, n_azimuth: int) -> float:
    t, w = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    z = np.repeat(t, n_azimuth)
    p = np.tile(phi, n_polar)
    r = np.sqrt(1.0 - z * z)
    pts = np.column_stack([r * np.cos(p), r * np.sin(p), z])
    vals = np.asarray(f(pts), dtype=float).reshape(n_polar, n_azimuth)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand returned a non-finite value")
    return float(w @ vals.mean(axis=1)) / 2.0


def integrate_sphere_product(f, n_polar: int = 64, n_azimuth: int = 128) -> IntegralEstimate:
    """Gauss-Legendre in ``cos(theta)`` times the periodic trapezoid rule in ``phi``.

    The error is ``|I(n) - I(n/2)|``, the change from halving both resolutions.
    """
    if n_polar < 2 or n_azimuth < 2:
        raise ValueError("need at least two nodes in each direction")
    fine = _product_rule(f, n_polar, n_azimuth)
    coarse = _product_rule(f, max(n_polar // 2, 1), max(n_azimuth // 2, 1))
    return IntegralEstimate(fine, abs(fine - coarse), "product", n_polar * n_azimuth)


def integrate_1d_adaptive(f, lo: float, hi: float, tol: float = 1e-12, limit: int = 200) -> IntegralEstimate:
    """Adaptive Gauss-Kronrod quadrature (QUADPACK) of a scalar function on ``[lo, hi]``."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err, info = integrate.quad(f, lo, hi, epsabs=tol, epsrel=0.0,
                                              limit=limit, full_output=True)[:3]
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"adaptive quadrature failed: {exc}") from exc
    if not math.isfinite(value) or err > tol:
        raise QuadratureError(f"adaptive quadrature missed tolerance {tol}: error {err}")
    return IntegralEstimate(value, err, "adaptive", info["neval"])


KERNELS = {
    "log_inverse": lambda d: -np.log(d),
    "log_plain": lambda d: np.log(d),
}


def cap_pair_energy_quadrature(cap_i: SphericalCap, cap_j: SphericalCap, kernel: str = "log_inverse",
                               n: int = 10**6, seed=None, workers: int = 1) -> IntegralEstimate:
    """Monte Carlo double integral of the log kernel over two normalized cap measures.

    Works for identical, overlapping and disjoint caps.  Pairs closer than
    ``1e-15`` (only possible when the caps overlap) are redrawn.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    k = KERNELS[kernel]

    def draw(rng, m):
        x = sample_uniform_cap(cap_i, rng, m)
        y = sample_uniform_cap(cap_j, rng, m)
        d = np.linalg.norm(x - y, axis=1)
        close = d < MIN_SEPARATION
        while np.any(close):
            c = int(close.sum())
            x[close] = sample_uniform_cap(cap_i, rng, c)
            y[close] = sample_uniform_cap(cap_j, rng, c)
            d[close] = np.linalg.norm(x[close] - y[close], axis=1)
            close = d < MIN_SEPARATION
        return k(d)

    return mc_estimate(draw, n, seed, workers)


def _legendre_table(x: float, n_max: int) -> np.ndarray:
    """``P_0(x) .. P_{n_max+1}(x)`` by the three-term recurrence."""
    x = float(x)
    P = [1.0, x]
    p0, p1 = 1.0, x
    for k in range(1, n_max + 1):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
        P.append(p1)
    return np.array(P)


def cap_pair_energy_series(d, a: float, n_terms: int | None = None) -> IntegralEstimate:
    """Deterministic log-kernel energy between two caps of radius ``a`` at centre distance ``d``.

    Uses the zonal expansion
    ``log(1/|x-y|) = 1/2 - log 2 + sum_n (2n+1) / (2n(n+1)) P_n(x.y)``
    together with the cap averages of ``P_n``.  The error reported is a
    bound on the truncated tail.
    """
    cap_measure(a)
    if n_terms is None:
        n_terms = int(min(max(2000, 1500.0 / a), 60000))
    ca = math.cos(a)
    Pa = _legendre_table(ca, n_terms)
    Pd = _legendre_table(math.cos(float(d)), n_terms)
    n = np.arange(1, n_terms + 1)
    avg = (Pa[n - 1] - Pa[n + 1]) / ((2 * n + 1) * (1.0 - ca))
    terms = (2 * n + 1) / (2.0 * n * (n + 1)) * avg**2 * Pd[n]
    value = 0.5 - math.log(2.0) + float(np.sum(terms))
    # |avg_n| <= sqrt(2/(pi n sin a)) * 2 / ((2n+1)(1-cos a)) for interior caps
    if 0 < a < math.pi:
        K = n_terms
        c = 8.0 / (math.pi * math.sin(a) * (1.0 - ca) ** 2)
        tail = c / (4.0 * 3.0 * K**3)
    else:
        tail = 0.0
    return IntegralEstimate(value, tail, "series", n_terms)
