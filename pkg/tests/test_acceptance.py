"""Acceptance criteria, one test (or a few) per criterion.

Each test records ``(passed, message)`` lines through the ``record``
fixture; ``conftest.py`` prints one PASS/FAIL line per criterion in the
terminal summary.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from logenergy import bounds, energy, geometry, quadrature, wasserstein
from logenergy.geometry import SphericalCap, sample_uniform_sphere
from logenergy.io import write_points
from logenergy.minimizer import (
    MinimizeOptions,
    energy_curve,
    fit_clog,
    icosahedron,
    icosahedron_energy,
    minimize_points,
)

WORKERS = 4
NORTH = np.array([0.0, 0.0, 1.0])


def _pole_pair(d):
    return NORTH, np.array([math.sin(d), 0.0, math.cos(d)])


# 1 -------------------------------------------------------------------------

def test_criterion_1_constants(record):
    t = time.perf_counter()
    checks = [
        record(1, abs(energy.I_SIGMA - (0.5 - math.log(2))) < 1e-16 and abs(energy.I_SIGMA + 0.193147) < 1e-6,
               f"I(sigma) = {energy.I_SIGMA:.10f}"),
        record(1, abs(bounds.c_bhs() + 0.0556053) <= 1e-6, f"C_BHS = {bounds.c_bhs():.10f} (target -0.0556053 +- 1e-6)"),
        record(1, abs(bounds.c_tilde() + 0.0568456) <= 1e-6, f"C_tilde = {bounds.c_tilde():.10f} (target -0.0568456 +- 1e-6)"),
        record(1, abs(bounds.u(2.0) + 0.0568528) <= 1e-7, f"u(2) = {bounds.u(2.0):.10f} (target -0.0568528 +- 1e-7)"),
        record(1, abs(bounds.EPS_MAX - 2.19927) <= 1e-5, f"eps_max = {bounds.EPS_MAX:.10f} (target 2.19927 +- 1e-5)"),
    ]
    q1 = quadrature.integrate_1d_adaptive(lambda s: 1 / math.cos(s) ** 3, 0, math.pi / 6, tol=1e-12)
    q2 = quadrature.integrate_1d_adaptive(lambda s: 1 / math.cos(s) ** 2, 0, math.pi / 6, tol=1e-12)
    checks.append(record(1, abs(bounds.C1 - q1.value) < 1e-10, f"C1 closed form - quadrature = {bounds.C1 - q1.value:.2e}"))
    checks.append(record(1, abs(bounds.C2 - q2.value) < 1e-10, f"C2 closed form - quadrature = {bounds.C2 - q2.value:.2e}"))
    elapsed = time.perf_counter() - t
    checks.append(record(1, elapsed < 1.0, f"elapsed {elapsed:.3f} s (< 1 s)"))
    assert all(checks)


# 2 -------------------------------------------------------------------------

def test_criterion_2_maximization(record):
    t = time.perf_counter()
    eps, val = bounds.maximize_linear_coefficient()
    elapsed = time.perf_counter() - t
    checks = [
        record(2, abs(eps - 2.0) <= 1e-2, f"argmax = {eps:.12f} (within 1e-2 of 2)"),
        record(2, abs(val + 0.0568456) <= 1e-7, f"max = {val:.12f} (within 1e-7 of -0.0568456)"),
        record(2, val > bounds.u(2.0), f"max - u(2) = {val - bounds.u(2.0):.3e} > 0"),
        record(2, elapsed < 1.0, f"elapsed {elapsed:.3f} s (< 1 s)"),
    ]
    assert all(checks)


# 3 -------------------------------------------------------------------------

ORACLE_SAMPLES = 10**7


@pytest.mark.slow
def test_criterion_3_cap_integral_oracles(record):
    streams = iter(np.random.SeedSequence(3).spawn(64))
    ok = []
    for a in (0.05, 0.1, 0.5, 1.0, math.pi / 2, math.pi):
        cap = SphericalCap(NORTH, a)
        est = quadrature.cap_pair_energy_quadrature(cap, cap, "log_inverse", ORACLE_SAMPLES, next(streams), WORKERS)
        exact = energy.cap_self_energy(a)
        z = (est.value - exact) / est.error
        ok.append(record(3, abs(z) <= 3, f"self-energy a={a:.6g}: closed {exact:.8f}, MC {est.value:.8f} ({z:+.2f} sigma)"))
    rng = np.random.default_rng(33)
    worst = 0.0
    for _ in range(20):
        a = float(rng.uniform(0.02, 0.5))
        d = float(rng.uniform(2 * a + 1e-3, math.pi - 1e-3))
        ci, cj = _pole_pair(d)
        est = quadrature.cap_pair_energy_quadrature(SphericalCap(ci, a), SphericalCap(cj, a), "log_inverse",
                                                    ORACLE_SAMPLES, next(streams), WORKERS)
        z = (est.value - energy.cap_cross_energy_disjoint(d, a)) / est.error
        worst = max(worst, abs(z))
    ok.append(record(3, worst <= 3, f"20 random disjoint pairs: worst deviation {worst:.2f} sigma"))
    assert all(ok)


def _extrapolate(f, ks=range(3, 11)):
    """Richardson extrapolation to ``a = 0`` of ``f(2^-k)`` with an ``a^2`` leading error,
    also checked against the value at ``a = 1e-3``."""
    vals = np.array([f(2.0**-k) for k in ks])
    return float(vals[-1] + (vals[-1] - vals[-2]) / 3), f(1e-3)


def test_criterion_3_expansion_targets(record):
    corr, corr_at = _extrapolate(lambda a: energy.cap_correction(a) / (a * a / 8))
    s_log_a, s_log_a_at = _extrapolate(lambda a: energy.cap_self_energy(a) + math.log(a) - 0.25)
    ok = [
        record(3, abs(corr - 1) < 1e-9 and abs(corr_at - 1) < 1e-6,
               f"correction/(a^2/8) -> {corr:.12f} (a=1e-3: {corr_at:.10f})"),
        # not the stated target; recorded for comparison with the literal one below
        record(3, abs(s_log_a) < 1e-9 and abs(s_log_a_at) < 1e-6,
               f"self-energy + log(a) - 1/4 -> {s_log_a:.3e} (a=1e-3: {s_log_a_at:.3e})"),
    ]
    assert all(ok)


@pytest.mark.xfail(strict=True, reason="the stated limit is -log 2, not 0; see the decisions ledger")
def test_criterion_3_literal_self_energy_target(record):
    lim, at = _extrapolate(lambda a: energy.cap_self_energy(a) + math.log(a / 2) - 0.25)
    passed = abs(lim) < 1e-6
    record(3, passed, f"self-energy + log(a/2) - 1/4 -> {lim:.12f} (target 0; -log 2 = {-math.log(2):.12f})")
    assert passed


# 4 -------------------------------------------------------------------------

def _disjoint_config(rng):
    n = int(rng.integers(4, 40))
    cfg = sample_uniform_sphere(rng, n)
    d = geometry.geodesic_distance(cfg[:, None, :], cfg[None, :, :])
    np.fill_diagonal(d, np.inf)
    # choose eps so every pair of caps is disjoint with some margin
    eps = 0.9 * d.min() / 2 * math.sqrt(n)
    return cfg, eps


def test_criterion_4_decomposition(record):
    t = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        cfg, eps = _disjoint_config(rng)
        b = energy.decomposition_lower_bound(cfg, eps)
        assert b.cross_error == 0.0
        worst = max(worst, abs(b.slack))
    ok = [record(4, worst <= 1e-9, f"20 all-disjoint configurations: max |slack| = {worst:.2e} (<= 1e-9)")]

    negatives, overlapping, min_z = 0, 0, math.inf
    for k in range(100):
        n = int(rng.integers(5, 25))
        eps = float(rng.choice([1.0, 2.0, 3.0]))
        cfg = sample_uniform_sphere(rng, n)
        b = energy.decomposition_lower_bound(cfg, eps, n_samples=10_000, seed=k)
        if b.cross_error > 0:
            overlapping += 1
        z = b.slack / b.cross_error if b.cross_error > 0 else (math.inf if b.slack >= -1e-9 else -math.inf)
        min_z = min(min_z, z)
        if b.slack < -3 * b.cross_error - 1e-9:
            negatives += 1
    ok.append(record(4, overlapping == 100, f"{overlapping}/100 random configurations have overlapping caps"))
    ok.append(record(4, negatives == 0,
                     f"slack >= -3 sigma on all 100 (violations {negatives}, smallest slack/sigma {min_z:.1f})"))
    elapsed = time.perf_counter() - t
    ok.append(record(4, elapsed < 10, f"elapsed {elapsed:.1f} s (< 10 s)"))
    assert all(ok)


# 5 -------------------------------------------------------------------------

KNOWN = [
    (2, -2 * math.log(2), 1e-9),
    (3, -3 * math.log(3), 1e-9),
    (4, -6 * math.log(8 / 3), 1e-9),
    (12, icosahedron_energy(), 1e-7),
]


def test_criterion_5_known_minimizers(record):
    t = time.perf_counter()
    ok = []
    for n, target, tol in KNOWN:
        res = minimize_points(n, MinimizeOptions(init="random", restarts=10, seed=n, threads=WORKERS))
        ok.append(record(5, abs(res.energy - target) <= tol,
                         f"N={n}: {res.energy:.12f} vs {target:.12f} (diff {res.energy - target:.1e}, tol {tol:g})"))
    elapsed = time.perf_counter() - t
    ok.append(record(5, elapsed < 60, f"elapsed {elapsed:.1f} s (< 1 min), 10 random restarts each"))
    assert all(ok)


# 6 -------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_clog_fit(record):
    curve = energy_curve(range(50, 501, 50), MinimizeOptions(threads=WORKERS))
    fit = fit_clog(curve)
    ok = [
        record(6, -0.065 <= fit.c_log_hat <= -0.045,
               f"c_log_hat = {fit.c_log_hat:.6f} in [-0.065, -0.045]; d = {fit.correction_coeff:.4f}, "
               f"residual RMS = {fit.residual_rms:.2e}; bracket [{bounds.c_tilde():.5f}, {bounds.c_bhs():.5f}]"),
    ]
    assert all(ok)


# 7 -------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_7_inequalities(record):
    rng = np.random.default_rng(7)
    ok = []

    tested, failures, skipped = 0, 0, 0
    for n in (6, 10, 20, 50, 100):
        for eps in (0.5, 1.0, 2.0):
            for _ in range(2):
                cfg = sample_uniform_sphere(rng, n)
                res = wasserstein.fejes_toth_check(cfg, eps, 2 * 10**5, rng, WORKERS)
                if res["skipped"]:
                    skipped += 1
                    continue
                tested += 1
                failures += not res["satisfied"]
    for n in (30, 100):
        cfg = minimize_points(n, MinimizeOptions(grad_tol=1e-6)).points
        for eps in (0.5, 1.0, 2.0):
            res = wasserstein.fejes_toth_check(cfg, eps, 10**6, rng, WORKERS)
            tested += 1
            failures += not res["satisfied"]
    ok.append(record(7, failures == 0 and tested > 0,
                     f"Fejes Toth: {tested - failures}/{tested} non-hemispheric configurations satisfied "
                     f"({skipped} hemispheric skipped)"))

    octa = np.vstack([np.eye(3), -np.eye(3)])
    ratios = []
    for eps in (0.0, 0.5, 1.0):
        res = wasserstein.fejes_toth_check(octa, eps, 10**6, rng, WORKERS)
        ratios.append(res["lhs"] / res["rhs"])
    ok.append(record(7, all(abs(r - 1) < 0.05 for r in ratios),
                     "octahedron lhs/rhs at eps 0, 0.5, 1: " + ", ".join(f"{r:.4f}" for r in ratios)))

    gz_fail, neg_i = 0, 0
    count = 0
    for n in (10, 50, 100):
        for eps in (0.5, 1.0, 2.0):
            reps = 12 if n == 10 else 11
            for _ in range(reps):
                if count == 100:
                    break
                cfg = sample_uniform_sphere(rng, n)
                res = wasserstein.gz_inequality_check(cfg, eps, 5 * 10**4, rng, WORKERS, pair_samples=5000)
                count += 1
                gz_fail += not res.satisfied
                if res.two_i_mu < -3 * res.two_i_mu_stderr:
                    neg_i += 1
    ok.append(record(7, gz_fail == 0 and count == 100, f"GZ: w1_lower^2 <= 2 I(mu) on {count - gz_fail}/{count} configurations"))
    ok.append(record(7, neg_i == 0, f"I(mu) >= 0 (within 3 sigma) on all {count} smeared measures"))
    assert all(ok)


# 8 -------------------------------------------------------------------------

def test_criterion_8_triangle(record):
    t = time.perf_counter()
    ns = [4, 5, 6, 10, 100, 10**3, 10**4, 10**5, 10**6]
    worst = max(geometry.triangle_for(n).lhuilier_residual() for n in ns)
    alpha = geometry.triangle_for(10**4).side * 100
    root = math.sqrt(8 * math.pi / math.sqrt(3))
    ex = bounds.toth_triangle_integral(10**4, 2.0)
    sa = bounds.toth_triangle_integral(10**4, 2.0, "small_angle")
    elapsed = time.perf_counter() - t
    ok = [
        record(8, worst < 1e-12, f"L'Huilier residual max over n in 4..1e6: {worst:.1e}"),
        record(8, abs(alpha / root - 1) < 1e-2, f"alpha(1e4)*100 = {alpha:.6f} vs {root:.6f} ({alpha / root - 1:+.2e})"),
        record(8, abs(ex - sa) / sa < 1e-2, f"exact/small_angle - 1 at n=1e4, eps=2: {ex / sa - 1:+.2e}"),
        record(8, elapsed < 10, f"elapsed {elapsed:.2f} s (< 10 s)"),
    ]
    assert all(ok)


# 9 -------------------------------------------------------------------------

def _cli(args, cwd, threads="2"):
    env = dict(os.environ, LOGENERGY_THREADS=threads)
    proc = subprocess.run([sys.executable, "-m", "logenergy", *args], cwd=cwd, env=env,
                          capture_output=True, check=False)
    return proc.returncode, proc.stdout


def test_criterion_9_reproducibility(record, tmp_path):
    write_points(tmp_path / "ico.txt", icosahedron())
    runs = {
        "constants": ["constants"],
        "bound": ["bound", "--maximize"],
        "verify": ["verify", "--samples", "100000", "--seed", "5"],
        "transport": ["transport", "--config", "ico.txt", "--eps", "2", "--samples", "100000", "--seed", "3"],
        "minimize": ["minimize", "--n", "30", "--seed", "2", "--restarts", "3", "--init", "random",
                     "--out", "{dir}/points.txt"],
        "plot-data": ["plot-data", "--steps", "200", "--out", "{dir}/grid.csv"],
    }
    ok = []
    for name, args in runs.items():
        outputs = []
        for k in range(2):
            d = tmp_path / name / f"run{k}"
            d.mkdir(parents=True)
            code, out = _cli([a.format(dir=d) for a in args], tmp_path)
            files = {p.name: p.read_bytes() for p in d.iterdir() if not p.name.endswith(".manifest.json")}
            outputs.append((code, out, files))
        same = outputs[0] == outputs[1]
        ok.append(record(9, same and outputs[0][0] == 0,
                         f"{name}: two runs byte-identical ({len(outputs[0][1])} bytes stdout, "
                         f"{len(outputs[0][2])} files)"))
    assert all(ok)
