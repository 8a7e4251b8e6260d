import numpy as np
import pytest
from scipy import integrate

from mfvolterra import hurst
from mfvolterra.covariance import build_cov_matrix, variance_R
from mfvolterra.errors import DomainError, FactorizationError
from mfvolterra.hurst import TimeGrid
from mfvolterra.kernel import eval_KH
from mfvolterra.simulate import (CHUNK, PathEnsemble, RandomSeed, cholesky_with_jitter,
                                 cumulative_kernel, empirical_cov, sample_cholesky,
                                 sample_cov_variance, sample_volterra, volterra_weights,
                                 worker_count)

GRID = TimeGrid.uniform(1.0, 16)


@pytest.fixture(scope="module")
def cov16():
    return build_cov_matrix(GRID, hurst.sinusoidal(0.75, 0.15), "reduced")


def test_seed_streams_are_path_indexed():
    s = RandomSeed(7)
    block = s.normals(3, 6, 5)
    assert np.array_equal(block[1], s.generator(4).standard_normal(5))
    assert not np.array_equal(RandomSeed(8).normals(0, 1, 5), s.normals(0, 1, 5))
    with pytest.raises(DomainError):
        RandomSeed(-1)


def test_worker_count(monkeypatch):
    monkeypatch.delenv("MFVOLTERRA_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("MFVOLTERRA_THREADS", "3")
    assert worker_count() == 3 and worker_count(2) == 2
    with pytest.raises(DomainError):
        worker_count(0)


def test_cholesky_deterministic_and_thread_invariant(sinus, cov16):
    seed = RandomSeed(2024)
    n = CHUNK * 2 + 17
    a = sample_cholesky(GRID, sinus, n, seed, cov=cov16, threads=1)
    b = sample_cholesky(GRID, sinus, n, seed, cov=cov16, threads=4)
    assert np.array_equal(a.paths, b.paths)
    assert np.all(a.paths[:, 0] == 0.0)


def test_pieces_match_whole(sinus, cov16):
    seed = RandomSeed(11)
    whole = sample_cholesky(GRID, sinus, 600, seed, cov=cov16).paths
    parts = [sample_cholesky(GRID, sinus, m, seed, cov=cov16, first_path=s).paths
             for s, m in [(0, 100), (100, 300), (400, 200)]]
    assert np.array_equal(whole, np.vstack(parts))


def test_cholesky_requires_matching_grid(sinus, cov16):
    with pytest.raises(DomainError):
        sample_cholesky(TimeGrid.uniform(1.0, 4), sinus, 3, RandomSeed(1), cov=cov16)
    with pytest.raises(DomainError):
        sample_cholesky(GRID, sinus, 0, RandomSeed(1), cov=cov16)


def test_empirical_covariance_within_se(sinus, cov16):
    n = 4000
    ens = sample_cholesky(GRID, sinus, n, RandomSeed(5), cov=cov16)
    E = empirical_cov(ens).entries
    se = np.sqrt(sample_cov_variance(cov16.entries, n))
    pos = GRID.times > 0
    z = np.abs(E - cov16.entries)[np.ix_(pos, pos)] / se[np.ix_(pos, pos)]
    assert np.mean(z <= 3) >= 0.95


def test_jitter_repairs_semidefinite():
    v = np.array([1.0, 2.0, 3.0])
    L, jitter = cholesky_with_jitter(np.outer(v, v))
    assert 0 < jitter <= 1e-8
    with pytest.raises(FactorizationError):
        cholesky_with_jitter(-np.eye(2))


def test_ensemble_validation():
    g = TimeGrid.uniform(1.0, 2)
    with pytest.raises(DomainError):
        PathEnsemble(g, np.ones((2, 3)), "cholesky", RandomSeed(0))
    with pytest.raises(DomainError):
        PathEnsemble(g, np.array([[0.0, np.nan, 1.0]]), "cholesky", RandomSeed(0))


@pytest.mark.parametrize("H", [0.55, 0.75, 0.95])
def test_cumulative_kernel_against_quadrature(H):
    t = 1.0
    for c in (0.05, 0.3, 0.7, 1.0):
        ref = integrate.quad(lambda u: eval_KH(t, u, H), 0, c, limit=200,
                             points=[c / 2], epsabs=1e-12, epsrel=1e-10)[0]
        assert cumulative_kernel(t, c, H) == pytest.approx(ref, rel=1e-7)


def test_cumulative_kernel_total_is_variance_bound():
    # sum of squared cell integrals / D converges to the variance from below (Cauchy-Schwarz)
    H = 0.75
    W = volterra_weights(TimeGrid.uniform(1.0, 4), hurst.constant(H), 1024)
    assert np.sum(W[-1] ** 2) <= variance_R(1.0, hurst.constant(H))
    assert np.sum(W[-1] ** 2) >= 0.99 * variance_R(1.0, hurst.constant(H))


def test_volterra_causal_and_deterministic(sinus):
    g = TimeGrid.uniform(1.0, 8)
    W = volterra_weights(g, sinus, 64)
    assert np.all(W[0] == 0)
    assert np.all(W[1, 8:] == 0)  # t_1 = 1/8 only sees the first 8 cells
    a = sample_volterra(g, sinus, 64, 300, RandomSeed(3))
    b = sample_volterra(g, sinus, 64, 300, RandomSeed(3), threads=2)
    assert np.array_equal(a.paths, b.paths) and a.method == "volterra"
    with pytest.raises(DomainError):
        volterra_weights(g, sinus, 4)
