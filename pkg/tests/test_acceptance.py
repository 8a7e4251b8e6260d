"""The twelve acceptance criteria, each at its stated tolerance and runtime budget."""

import math
import time

import numpy as np
import pytest
from scipy import stats

from mfvolterra import analysis, hurst, tanaka
from mfvolterra.covariance import build_cov_matrix, increment_second_moment, variance_R
from mfvolterra.hurst import QuadratureSpec, TimeGrid
from mfvolterra.simulate import RandomSeed, sample_cholesky, sample_volterra, volterra_weights
from mfvolterra.specfun import beta_fn, c_lambda_inv_sq

SEED = 20240607


def sinus():
    return hurst.sinusoidal(0.75, 0.15)


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_01_normalization_identity(record):
    with Clock() as clk:
        lams = np.linspace(0.55, 0.95, 50)
        err = max(abs(c_lambda_inv_sq(l) * l * (2 * l - 1) / beta_fn(2 - 2 * l, l - 0.5) - 1) for l in lams)
    ok = err <= 1e-10 and clk.elapsed < 1
    record(1, ok, f"max relative error {err:.2e} (tol 1e-10), {clk.elapsed:.2f} s")
    assert ok


def test_02_covariance_two_routes(record):
    h = sinus()
    grid = TimeGrid(np.concatenate([[0.0], np.arange(1, 33) / 32]))
    with Clock() as clk:
        A = build_cov_matrix(grid, h, "inner-product").entries[1:, 1:]
        B = build_cov_matrix(grid, h, "prop2-integral").entries[1:, 1:]
    rel = float(np.max(np.abs(A - B) / np.abs(A)))
    ok = rel <= 1e-5 and clk.elapsed < 300
    record(2, ok, f"32 positive times, max entrywise relative gap {rel:.2e} (tol 1e-5), {clk.elapsed:.0f} s")
    assert ok


def test_03_exact_sampler_variance(record):
    h = sinus()
    grid = TimeGrid.uniform(1.0, 63)
    n = 20_000
    with Clock() as clk:
        # 1e-7 relative quadrature is four orders below the Monte Carlo resolution
        ens = sample_cholesky(grid, h, n, RandomSeed(SEED), method="inner-product",
                              q=QuadratureSpec(1e-10, 1e-7))
        pos = grid.times > 0
        R = np.array([variance_R(t, h) for t in grid.times[pos]])
        v = ens.paths[:, pos].var(axis=0, ddof=1)
        se = R * math.sqrt(2.0 / (n - 1))
        frac = float(np.mean(np.abs(v - R) <= 3 * se))
    ok = frac >= 0.95 and clk.elapsed < 300
    record(3, ok, f"{frac:.1%} of {pos.sum()} positive grid times within 3 SE (need >= 95%), "
                  f"{clk.elapsed:.0f} s")
    assert ok


def test_04_volterra_vs_exact(record):
    h = sinus()
    grid = TimeGrid.uniform(1.0, 16)
    n_sub = 2048
    with Clock() as clk:
        exact = variance_R(1.0, h)
        ens = sample_volterra(grid, h, n_sub, 100_000, RandomSeed(SEED))
        mc = float(ens.paths[:, -1].var(ddof=1))
        scheme = float(np.sum(volterra_weights(grid, h, n_sub)[-1] ** 2))
        rel = abs(mc - exact) / exact
        cov = build_cov_matrix(grid, h, "reduced")
        passes = 0
        for k in range(10):
            v = sample_volterra(grid, h, n_sub, 2000, RandomSeed(SEED + k)).paths[:, -1]
            c = sample_cholesky(grid, h, 2000, RandomSeed(SEED + 100 + k), cov=cov).paths[:, -1]
            passes += stats.ks_2samp(v, c).pvalue > 0.01
    ok = rel <= 0.02 and passes >= 9 and clk.elapsed < 600
    record(4, ok, f"variance at T: sampled {mc:.5g}, scheme {scheme:.5g}, exact {exact:.5g} "
                  f"({rel:.2%}, tol 2%); KS passes {passes}/10 (need 9); {clk.elapsed:.0f} s")
    assert ok


def test_05_increment_law(record):
    with Clock() as clk:
        worst = 0.0
        for lam in (0.6, 0.75, 0.9):
            h = hurst.constant(lam)
            for s, t in [(0.0, 0.3), (0.2, 0.5), (0.5, 0.5001), (0.1, 1.0), (0.7, 0.9)]:
                ref = c_lambda_inv_sq(lam) * (t - s) ** (2 * lam)
                worst = max(worst, abs(increment_second_moment(s, t, h) - ref) / ref)
    ok = worst <= 1e-6 and clk.elapsed < 10
    record(5, ok, f"max relative deviation {worst:.2e} (tol 1e-6), {clk.elapsed:.1f} s")
    assert ok


def test_06_holder_exponent(record):
    with Clock() as clk:
        const = hurst.constant(0.75)
        h = sinus()
        e_const = max(abs(analysis.holder_exponent(t0, const).estimate - 0.75) for t0 in (0.3, 0.5))
        e_sin = max(abs(analysis.holder_exponent(t0, h).estimate - h(t0)) for t0 in (0.3, 0.5))
    ok = e_const <= 1e-3 and e_sin <= 0.05 and clk.elapsed < 60
    record(6, ok, f"constant error {e_const:.1e} (tol 1e-3), sinusoidal error {e_sin:.4f} (tol 0.05), "
                  f"{clk.elapsed:.0f} s")
    assert ok


def test_07_berman(record):
    with Clock() as clk:
        val = analysis.berman_integral(hurst.constant(0.75), 1.0)
        oracle = analysis.berman_constant_oracle(0.75)
        rel = abs(val - oracle) / oracle
        v1, v2, ref_rel = analysis.berman_refinement(sinus(), 1.0, 256)
    ok = rel <= 0.01 and ref_rel <= 0.01 and clk.elapsed < 120
    record(7, ok, f"constant H=0.75: {val:.10g} vs {oracle:.10g} ({rel:.1e}); sinusoidal refinement "
                  f"256->512 changes by {ref_rel:.2%} (tol 1%), {clk.elapsed:.0f} s")
    assert ok


def test_08_lnd(record):
    configs = [(hurst.constant(0.75), [0.5, 0.6]), (sinus(), [0.2, 0.5]), (sinus(), [0.3, 0.5, 0.55]),
               (sinus(), [0.1, 0.4, 0.7, 0.72]), (hurst.constant(0.6), [0.25, 0.5, 0.75, 1.0])]
    with Clock() as clk:
        V = [analysis.lnd_ratio(ts, h) for h, ts in configs]
        gap = min(v - analysis.lnd_whole_past_bound(ts, h) for v, (h, ts) in zip(V, configs))
        I = analysis.lnd_I_lower_bound(0.6, 0.9)
    ok = min(V) > 0 and gap >= -1e-8 and I > 0 and clk.elapsed < 120
    record(8, ok, f"min V_m {min(V):.4f} > 0, min(V_m - bound) {gap:.2e} (>= -1e-8), "
                  f"I(0.6, 0.9) = {I:.6f} > 0, {clk.elapsed:.0f} s")
    assert ok


def test_09_occupation_identity(record):
    grid = TimeGrid.uniform(1.0, 256)
    with Clock() as clk:
        ens = sample_cholesky(grid, sinus(), 100, RandomSeed(SEED), method="reduced")
        worst_ind, worst_lip = 0.0, 0.0
        for p in ens.paths:
            bins = analysis.default_bins(p)
            dx = float(np.max(np.diff(bins)))
            for k in range(len(bins) - 1):
                ind = lambda x, k=k: ((x >= bins[k]) & (x < bins[k + 1])).astype(float)  # noqa: E731
                worst_ind = max(worst_ind, analysis.occupation_identity_residual(p, grid, ind, bins))
            for g, lip in ((np.sin, 1.0), (np.abs, 1.0), (lambda x: 3 * x, 3.0)):
                r = analysis.occupation_identity_residual(p, grid, g, bins)
                worst_lip = max(worst_lip, r / (dx * lip * grid.T))
    ok = worst_ind <= 1e-12 and worst_lip <= 1 and clk.elapsed < 60
    record(9, ok, f"indicator residual {worst_ind:.1e} (tol 1e-12); Lipschitz residual "
                  f"{worst_lip:.3f} x dx Lip T (tol 1); {clk.elapsed:.0f} s")
    assert ok


def test_10_tanaka_expectation(record):
    with Clock() as clk:
        res = tanaka.tanaka_lattice(sinus(), [-0.2, 0.0, 0.1], [1e-2, 1e-3], [0.5, 1.0], 20_000,
                                    RandomSeed(SEED))
    worst = max(abs(r.z) for r in res)
    ok = all(r.passed for r in res) and clk.elapsed < 600
    record(10, ok, f"{sum(r.passed for r in res)}/{len(res)} lattice points within 3 SE "
                   f"(max |z| {worst:.2f}), {clk.elapsed:.0f} s")
    assert ok


def test_11_remark13(record):
    with Clock() as clk:
        out = tanaka.remark13_case(math.e ** 1.1, math.e ** 1.9)
    ok = out["unnormalized_constant"] and out["unnormalized_derivative_zero"] and clk.elapsed < 1
    record(11, ok, f"max |u^(2h(u)) - e^2| {out['unnormalized_max_deviation_from_e2']:.1e}, "
                   f"max |R'| {out['unnormalized_fd_derivative_max']:.1e} (tol 1e-10), {clk.elapsed:.2f} s")
    assert ok


def test_12_local_time_scaling(record):
    H = 0.6
    with Clock() as clk:
        grid = TimeGrid.uniform(1.0, 2 ** 12 - 1)
        ens = sample_cholesky(grid, hurst.constant(H), 500, RandomSeed(SEED), method="reduced")
        rep = analysis.regularity_scaling(ens, H)
    space_floor, time_floor = 0.8 * (1 - H) / (2 * H), 0.8 * (1 - H)
    ok = rep.space_exponent >= space_floor and rep.time_exponent >= time_floor and clk.elapsed < 900
    record(12, ok, f"space exponent {rep.space_exponent:.3f} (>= {space_floor:.3f}), time exponent "
                   f"{rep.time_exponent:.3f} (>= {time_floor:.3f}), {clk.elapsed:.0f} s")
    assert ok
