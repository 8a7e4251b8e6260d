import math

import numpy as np
import pytest

from mfvolterra import hurst, tanaka
from mfvolterra.errors import DomainError
from mfvolterra.hurst import TimeGrid
from mfvolterra.simulate import RandomSeed


def test_abs_gaussian_mean():
    assert tanaka.abs_gaussian_mean(1.0, 0.0) == pytest.approx(math.sqrt(2 / math.pi))
    assert tanaka.abs_gaussian_mean(0.0, -0.3) == 0.3
    rng = np.random.default_rng(0)
    x = rng.normal(0, 0.5, 400_000)
    assert tanaka.abs_gaussian_mean(0.25, 0.2) == pytest.approx(np.mean(np.abs(x - 0.2)), rel=5e-3)


@pytest.mark.parametrize("a, eps, t", [(0.0, 1e-2, 1.0), (0.1, 1e-3, 0.5), (-0.2, 1e-2, 0.7)])
def test_deterministic_side_closed_form(sinus, a, eps, t):
    assert tanaka.deterministic_side(sinus, a, eps, t) == pytest.approx(
        tanaka.deterministic_side_closed(sinus, a, eps, t), rel=1e-8)


def test_deterministic_side_edge_cases(sinus):
    assert tanaka.deterministic_side(sinus, 0.0, 1e-2, 0.0) == 0.0
    with pytest.raises(DomainError):
        tanaka.deterministic_side(sinus, 0.0, 0.0, 1.0)


def test_r_prime_grid(sinus):
    ts = np.linspace(0, 1, 5)
    rp = tanaka.r_prime_on_grid(ts, sinus)
    assert rp[0] == rp[1]


def test_smoothed_occupation_vectorized(sinus):
    g = TimeGrid.uniform(1.0, 16)
    P = np.random.default_rng(1).normal(size=(3, 17)) * 0.1
    P[:, 0] = 0
    v = tanaka.smoothed_weighted_occupation(P, g, 0.0, 1e-2, sinus)
    assert v.shape == (3,)
    assert v[1] == pytest.approx(tanaka.smoothed_weighted_occupation(P[1], g, 0.0, 1e-2, sinus))
    # truncation at t keeps only the cells inside [0, t]
    half = tanaka.smoothed_weighted_occupation(P[0], g, 0.0, 1e-2, sinus, t=0.5)
    assert half < v[0]


def test_constant_path_functional(sinus):
    # path pinned at a: the functional is p_eps(0) (R(t) - left-point error)
    g = TimeGrid.uniform(1.0, 4096)
    P = np.zeros(g.times.size)
    v = tanaka.smoothed_weighted_occupation(P, g, 0.0, 1e-2, sinus)
    from mfvolterra.covariance import variance_R
    assert v == pytest.approx(variance_R(1.0, sinus) / math.sqrt(2 * math.pi * 1e-2), rel=5e-3)


def test_weighted_local_time_rejects_unknown_convention(sinus):
    g = TimeGrid.uniform(1.0, 8)
    with pytest.raises(DomainError):
        tanaka.weighted_local_time(np.zeros(9), g, 0.0, sinus, [-1, 1], convention="bogus")


def test_lattice_small(sinus):
    res = tanaka.tanaka_lattice(sinus, [0.0], [1e-2], [0.5, 1.0], 2000, RandomSeed(3), n_grid=256)
    assert len(res) == 2
    for r in res:
        assert r.mc_se > 0 and abs(r.z) < 5
        assert set(r.as_dict()) == {"a", "eps", "t", "mc_mean", "mc_se", "deterministic", "pass"}


def test_lattice_needs_differentiable():
    lin = hurst.table_interpolated([0, 1], [0.6, 0.8], differentiable=False)
    with pytest.raises(DomainError):
        tanaka.tanaka_lattice(lin, [0.0], [1e-2], [1.0], 10, RandomSeed(1))


def test_remainder_check(sinus):
    mean, se, expected = tanaka.tanaka_remainder_check(sinus, 0.0, 1e-2, 1.0, 4000, RandomSeed(8),
                                                       n_grid=512)
    assert abs(mean - expected) <= 4 * se + 5e-3


def test_remark13():
    out = tanaka.remark13_case(math.e ** 1.1, math.e ** 1.9)
    assert out["unnormalized_constant"] and out["unnormalized_derivative_zero"]
    assert out["normalized_not_constant"]
    with pytest.raises(DomainError):
        tanaka.inverse_log_hurst(1.0, 2.0)
