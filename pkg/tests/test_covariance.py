import math

import numpy as np
import pytest

from mfvolterra import hurst
from mfvolterra.covariance import (build_cov_matrix, cross_cov_reduced, cross_cov_X, fbm_covariance,
                                   increment_second_moment, increment_second_moment_reduced,
                                   increment_upper_bound, inner_cov_X, variance_R, variance_R_prime,
                                   variance_R_unnormalized, variance_R_unnormalized_prime)
from mfvolterra.errors import DomainError
from mfvolterra.hurst import QuadratureSpec, TimeGrid
from mfvolterra.specfun import c_lambda_inv_sq

C_INV2_075 = 13.984306956224638989


def test_variance_at_one():
    assert cross_cov_X(1, 1, 0.75, 0.75) == pytest.approx(C_INV2_075, rel=1e-7)
    assert inner_cov_X(1, 1, 0.75, 0.75) == pytest.approx(C_INV2_075, rel=1e-7)
    assert cross_cov_reduced(1.0, 1.0, 0.75, 0.75) == pytest.approx(C_INV2_075, rel=1e-12)


def test_zero_time_gives_zero():
    assert cross_cov_X(0, 0.5, 0.7, 0.8) == 0.0
    assert inner_cov_X(0.5, 0, 0.7, 0.8) == 0.0


def test_three_routes_agree_mixed_indices():
    a = inner_cov_X(1, 0.5, 0.8, 0.6)
    assert cross_cov_X(1, 0.5, 0.8, 0.6) == pytest.approx(a, rel=1e-6)
    assert cross_cov_reduced(1.0, 0.5, 0.8, 0.6) == pytest.approx(a, rel=1e-8)


def test_inner_product_symmetry():
    assert inner_cov_X(0.7, 0.4, 0.65, 0.85) == pytest.approx(inner_cov_X(0.4, 0.7, 0.85, 0.65), rel=1e-9)


def test_constant_index_is_fbm():
    H, t, s = 0.7, 0.9, 0.35
    fbm = 0.5 * c_lambda_inv_sq(H) * (t ** (2 * H) + s ** (2 * H) - (t - s) ** (2 * H))
    assert inner_cov_X(t, s, H, H) == pytest.approx(fbm, rel=1e-7)
    assert cross_cov_reduced(t, s, H, H) == pytest.approx(fbm, rel=1e-10)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        inner_cov_X(-0.1, 0.5, 0.7, 0.7)
    with pytest.raises(DomainError):
        cross_cov_X(0.5, 0.5, 0.4, 0.7)


def test_variance_R(sinus):
    assert variance_R(0.0, sinus) == 0.0
    lam = sinus(0.3)
    assert variance_R(0.3, sinus) == pytest.approx(0.3 ** (2 * lam) * c_lambda_inv_sq(lam), rel=1e-14)
    assert variance_R_unnormalized(0.3, sinus) == pytest.approx(0.3 ** (2 * lam), rel=1e-14)


def test_variance_R_prime_fd(sinus):
    d = 1e-5
    fd = (variance_R(0.5 + d, sinus) - variance_R(0.5 - d, sinus)) / (2 * d)
    assert abs(variance_R_prime(0.5, sinus) - fd) <= 1e-5
    fdu = (variance_R_unnormalized(0.5 + d, sinus) - variance_R_unnormalized(0.5 - d, sinus)) / (2 * d)
    assert variance_R_unnormalized_prime(0.5, sinus) == pytest.approx(fdu, rel=1e-7)


def test_variance_R_prime_needs_derivative():
    lin = hurst.table_interpolated([0, 1], [0.6, 0.8], differentiable=False)
    with pytest.raises(DomainError):
        variance_R_prime(0.5, lin)
    with pytest.raises(DomainError):
        variance_R_prime(0.0, hurst.constant(0.7))


def test_increment_constant_law():
    h = hurst.constant(0.7)
    for s, t in [(0.2, 0.5), (0.5, 0.51), (0.0, 0.4)]:
        ref = c_lambda_inv_sq(0.7) * (t - s) ** 1.4
        assert increment_second_moment(s, t, h) == pytest.approx(ref, rel=1e-6)


def test_increment_zero_and_order(sinus):
    assert increment_second_moment(0.4, 0.4, sinus) == 0.0
    with pytest.raises(DomainError):
        increment_second_moment(0.5, 0.4, sinus)


def test_increment_matches_reduced(sinus):
    for s, t in [(0.1, 0.3), (0.45, 0.46), (0.7, 0.95)]:
        assert increment_second_moment(s, t, sinus) == pytest.approx(
            float(increment_second_moment_reduced(s, t, sinus)), rel=1e-6)


def test_increment_upper_bound(sinus, rng):
    s = rng.uniform(0, 1, 40)
    t = rng.uniform(0, 1, 40)
    s, t = np.minimum(s, t), np.maximum(s, t)
    M = increment_second_moment_reduced(s, t, sinus)
    for a, b, m in zip(s, t, M):
        assert m <= increment_upper_bound(a, b, sinus, T=1.0)
    assert increment_second_moment(0.3, 0.7, sinus) <= increment_upper_bound(0.3, 0.7, sinus)
    with pytest.raises(DomainError):
        increment_upper_bound(0.3, 0.7, sinus, T=0.5)


def test_single_point_grid():
    C = build_cov_matrix(TimeGrid([0.0]), hurst.constant(0.7))
    assert C.entries.shape == (1, 1) and C.entries[0, 0] == 0.0


def test_methods_agree_on_8_points(sinus):
    g = TimeGrid.uniform(1.0, 7)
    q = QuadratureSpec(1e-10, 1e-8)
    mats = {m: build_cov_matrix(g, sinus, m, q) for m in ("inner-product", "prop2-integral", "reduced")}
    ref = mats["reduced"].entries
    scale = np.max(np.abs(ref))
    for m, C in mats.items():
        assert C.method == m
        assert C.check(sinus) == []
        assert np.max(np.abs(C.entries - ref)) <= 1e-6 * scale


def test_reduced_matches_fbm_on_large_grid():
    ts = np.linspace(0, 1, 257)
    C = build_cov_matrix(TimeGrid(ts), hurst.constant(0.6), "reduced")
    F = fbm_covariance(ts, 0.6)
    assert np.max(np.abs(C.entries - F)) <= 1e-11 * np.max(F)


def test_check_flags_bad_matrix(const75):
    g = TimeGrid.uniform(1.0, 2)
    C = build_cov_matrix(g, const75, "reduced")
    C.entries[1, 2] += 1.0
    assert "not symmetric" in C.check()
    C.entries[2, 1] += 1.0
    C.entries[1, 1] *= 0.01
    assert any("PSD" in p or "diagonal" in p for p in C.check(const75))


def test_unknown_method(const75):
    with pytest.raises(DomainError):
        build_cov_matrix(TimeGrid.uniform(1, 2), const75, "magic")


def test_cross_cov_quadrature_halving():
    q = QuadratureSpec(1e-9, 1e-7)
    a, b = cross_cov_X(0.8, 0.3, 0.7, 0.65, q), cross_cov_X(0.8, 0.3, 0.7, 0.65, q.halved())
    assert abs(a - b) <= max(q.abs_tol, q.rel_tol * abs(a))
    assert math.isfinite(a)
