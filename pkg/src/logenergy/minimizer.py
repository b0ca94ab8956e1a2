"""Desk-scale minimization of the logarithmic energy and a fit of the linear term.

The optimizer is projected (Riemannian) gradient descent on the product of
spheres.  A step moves every point along ``-t g_i`` in its tangent plane and
retracts by renormalization.  The step length starts from a Barzilai-Borwein
estimate and is halved until the Armijo condition holds.

Near a critical point the decrease ``t |g|^2`` is far below the rounding
level of the energy itself, so the Armijo test uses the energy change
computed pair by pair, ``-1/2 sum log1p(delta d_ij^2 / d_ij^2)``, with the
distance changes written in terms of ``t g`` only.

Energies returned here are upper estimates of the minimal energy; nothing
certifies global optimality.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .energy import I_SIGMA, decomposition_floor, pair_energy
from .geometry import as_configuration, sample_uniform_sphere

log = logging.getLogger(__name__)

ARMIJO = 1e-4
MAX_HALVINGS = 60
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass
class MinimizeOptions:
    max_iters: int = 20000
    grad_tol: float | None = None  # default 1e-10 * N
    restarts: int = 1
    seed: int = 0
    init: str = "spiral"
    threads: int = 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol is not None and self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.init not in ("spiral", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    def tol_for(self, n: int) -> float:
        return 1e-10 * n if self.grad_tol is None else self.grad_tol


@dataclass
class MinimizeResult:
    points: np.ndarray
    energy: float
    iters: int
    grad_norm: float
    converged: bool
    status: str


def init_spiral(n: int) -> np.ndarray:
    """Golden-angle spiral: heights ``1 - (2k + 1)/n``, azimuth advancing by the golden angle."""
    if n < 2:
        raise ValueError("need n >= 2")
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    r = np.sqrt(1.0 - z * z)
    phi = k * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def init_random(n: int, seed=None) -> np.ndarray:
    return sample_uniform_sphere(seed, n)


def icosahedron() -> np.ndarray:
    """Vertices of the regular icosahedron on the unit sphere."""
    p = (1.0 + math.sqrt(5.0)) / 2.0
    v = []
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            v += [(0.0, s1, s2 * p), (s1, s2 * p, 0.0), (s2 * p, 0.0, s1)]
    v = np.array(v)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def icosahedron_energy() -> float:
    """``12 (-5 log l - 5 log sqrt(4 - l^2) - log 2)`` with edge ``l = 4 / sqrt(10 + 2 sqrt 5)``."""
    l2 = 16.0 / (10.0 + 2.0 * math.sqrt(5.0))
    return 12.0 * (-2.5 * math.log(l2) - 2.5 * math.log(4.0 - l2) - math.log(2.0))


def _geometry(x: np.ndarray):
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, 1.0)
    egrad = -2.0 * np.einsum("ijk,ij->ik", diff, 1.0 / d2)
    g = egrad - np.sum(egrad * x, axis=1, keepdims=True) * x
    # second pass removes the O(1e-16) radial residue, which dominates g . x_j once |g| ~ 1e-10
    g -= np.sum(g * x, axis=1, keepdims=True) * x
    return d2, g


def _step(x: np.ndarray, g: np.ndarray, d2: np.ndarray, t: float):
    """Retracted point set and the exact energy change along ``-t g``."""
    g2 = np.sum(g * g, axis=1)
    s = np.sqrt(1.0 + t * t * g2)
    x_new = x - t * g
    x_new /= np.linalg.norm(x_new, axis=1, keepdims=True)
    q = t * t * g2
    # 1 - s_i s_j without cancellation
    prod_m1 = q[:, None] + q[None, :] + np.outer(q, q)
    one_minus_ss = -prod_m1 / (1.0 + np.outer(s, s))
    gx = g @ x.T
    ddot = ((x @ x.T) * one_minus_ss
            - t * (gx + gx.T) + t * t * (g @ g.T)) / np.outer(s, s)
    ratio = -2.0 * ddot / d2
    np.fill_diagonal(ratio, 0.0)
    return x_new, -0.5 * float(np.sum(np.log1p(ratio)))


def minimize(cfg0, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Riemannian gradient descent with Armijo backtracking from ``cfg0``."""
    opts = opts or MinimizeOptions()
    x = as_configuration(cfg0)
    n = x.shape[0]
    tol = opts.tol_for(n)
    d2, g = _geometry(x)
    gnorm = float(np.linalg.norm(g))
    t = 0.1 / max(float(np.max(np.linalg.norm(g, axis=1))), 1.0) / math.sqrt(n)
    status = "max_iters"
    it = 0
    for it in range(opts.max_iters):
        if gnorm <= tol:
            status = "converged"
            break
        for _ in range(MAX_HALVINGS + 1):
            x_new, de = _step(x, g, d2, t)
            if de <= -ARMIJO * t * gnorm**2:
                break
            t *= 0.5
        else:
            status = "stagnated"
            log.warning("line search stagnated at iteration %d (|g| = %.3e)", it, gnorm)
            break
        assert de <= 0.0
        d2_new, g_new = _geometry(x_new)
        s, y = x_new - x, g_new - g
        sy = float(np.sum(s * y))
        t = float(np.sum(s * s)) / sy if sy > 0 else 2.0 * t
        t = min(max(t, 1e-12), 1e3)
        x, d2, g = x_new, d2_new, g_new
        gnorm = float(np.linalg.norm(g))
    else:
        if gnorm <= tol:
            status = "converged"
    return MinimizeResult(x, pair_energy(x), it, gnorm, status == "converged", status)


def _starts(n: int, opts: MinimizeOptions) -> list[np.ndarray]:
    streams = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    out = []
    for k, ss in enumerate(streams):
        if k == 0 and opts.init == "spiral":
            out.append(init_spiral(n))
        else:
            out.append(init_random(n, np.random.default_rng(ss)))
    return out


def minimize_points(n: int, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Best result over ``opts.restarts`` starts; ties go to the earliest restart."""
    opts = opts or MinimizeOptions()
    starts = _starts(n, opts)
    if opts.threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            results = list(pool.map(lambda s: minimize(s, opts), starts))
    else:
        results = [minimize(s, opts) for s in starts]
    return min(results, key=lambda r: r.energy)


def energy_curve(n_list, opts: MinimizeOptions | None = None, keep: dict | None = None) -> list[tuple[int, float]]:
    """Best minimized energy for each ``N``, checked against two rigorous bounds.

    ``I(sigma) N (N - 1)`` bounds the minimum from above (it is the mean
    energy of independent uniform points) and the decomposition at
    ``eps = 2`` with ``I(mu) >= 0`` bounds it from below.
    """
    curve = []
    for n in n_list:
        if n < 2:
            raise ValueError("each N must be >= 2")
        res = minimize_points(int(n), opts)
        upper = I_SIGMA * n * (n - 1)
        lower = decomposition_floor(int(n), 2.0)
        if not lower <= res.energy <= upper:
            raise RuntimeError(f"N={n}: energy {res.energy} outside [{lower}, {upper}]")
        if keep is not None:
            keep[int(n)] = res
        log.info("N=%d E=%.12f iters=%d |g|=%.2e %s", n, res.energy, res.iters, res.grad_norm, res.status)
        curve.append((int(n), res.energy))
    return curve


@dataclass
class FitResult:
    c_log_hat: float
    correction_coeff: float
    residual_rms: float
    n_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def linear_term_residual(n, energy) -> np.ndarray:
    """``(E - I(sigma) N^2 + N log(N) / 2) / N``."""
    n = np.asarray(n, dtype=float)
    return (np.asarray(energy, dtype=float) - I_SIGMA * n**2 + 0.5 * n * np.log(n)) / n


def fit_clog(curve) -> FitResult:
    """Least squares of the linear-term residual on ``c + d / sqrt(N)``."""
    n = np.array([p[0] for p in curve], dtype=float)
    e = np.array([p[1] for p in curve], dtype=float)
    if np.unique(n).size < 3:
        raise ValueError("need at least three distinct N")
    if not np.all(np.isfinite(e)):
        raise ValueError("energies must be finite")
    order = np.argsort(n)
    n, e = n[order], e[order]
    y = linear_term_residual(n, e)
    A = np.column_stack([np.ones_like(n), n**-0.5])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return FitResult(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))),
                     [int(k) for k in n])
