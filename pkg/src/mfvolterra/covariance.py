"""Second-order structure of B_h(t) = X(t, h(t)).

Three routes to E[X(t, l) X(s, l')]:

* ``inner_cov_X``: int_0^{t^s} K_l(t, u) K_l'(s, u) du by nested quadrature;
* ``cross_cov_X``: the double integral of beta~(y, z) |y - z|^(l + l' - 2) (y/z)^(l - l')
  over [0, t] x [0, s], split at the diagonal;
* ``cross_cov_reduced``: the same double integral in closed form.  The integrand is
  homogeneous, so each triangle reduces to integrals along the edges away from the
  origin, which are an incomplete beta function and a 2F1. Vectorized; used for
  large grids.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, MFVolterraError
from .hurst import DEFAULT_QUAD, QuadratureSpec, TimeGrid
from .kernel import kernel_index_difference, kernel_segment, phi_bound_sq_integral
from .quadrature import adaptive
from .specfun import beta_fn, c_lambda_inv_sq, dc_inv_sq_dlambda

METHODS = ("inner-product", "prop2-integral", "reduced")


def _check_lams(*lams):
    for lam in lams:
        if not 0.5 < lam < 1.0:
            raise DomainError(f"Hurst index must lie in (1/2, 1), got {lam!r}")


def _check_times(*ts):
    for t in ts:
        if not t >= 0.0:
            raise DomainError(f"times must be nonnegative, got {t!r}")


# ---------------------------------------------------------------------------
# kernel inner product
# ---------------------------------------------------------------------------

def _seg_over_tail(u, m, top, H, q):
    """kernel_segment(u, u, top, H) / (m - u)^(H - 1/2) if top == m, else the segment."""
    if top > m:
        return kernel_segment(u, u, top, H, q)
    gap = m - u
    if gap <= 1e-13 * m:
        return m ** (H - 0.5) / (H - 0.5)
    return kernel_segment(u, u, m, H, q) / gap ** (H - 0.5)


def inner_cov_X(t, s, lam, lam2, q=DEFAULT_QUAD):
    """int_0^{t^s} K_lam(t, u) K_lam2(s, u) du."""
    t, s, lam, lam2 = float(t), float(s), float(lam), float(lam2)
    _check_times(t, s)
    _check_lams(lam, lam2)
    m = min(t, s)
    if m == 0.0:
        return 0.0
    # endpoint behaviour: u^(1 - l - l') at 0, (m - u)^(l* - 1/2) at m for each
    # kernel whose upper limit equals m
    beta_end = 0.0
    if t == m:
        beta_end += lam - 0.5
    if s == m:
        beta_end += lam2 - 0.5

    def f(u):
        return _seg_over_tail(u, m, t, lam, q) * _seg_over_tail(u, m, s, lam2, q)

    return adaptive(f, 0.0, m, q, weight="alg", wvar=(1.0 - lam - lam2, beta_end),
                    what="kernel inner product")


# ---------------------------------------------------------------------------
# double integral, by quadrature
# ---------------------------------------------------------------------------

def _triangle(top, m, e_out, e_in, gamma, q):
    """int_0^m x^e_out int_x^top (v - x)^gamma v^e_in dv dx.

    Inner integral after r = (v - x)^(gamma + 1), rescaled to [0, 1]:
    (top - x)^(gamma+1) / (gamma+1) * int_0^1 (x + (top - x) rho^kappa)^e_in d rho.
    """
    g1 = gamma + 1.0
    kappa = 1.0 / g1

    def inner_mean(x):
        span = top - x
        if e_in == 0.0:
            return 1.0 / g1
        if x == 0.0:
            return top ** e_in / (g1 * (1.0 + kappa * e_in))

        def g(rho):
            return (x + span * rho ** kappa) ** e_in

        knee = (x / span) ** g1 if span > 0 else 1.0
        return adaptive(g, 0.0, 1.0, q, points=(knee,), what="inner triangle integral") / g1

    if top == m:
        return adaptive(inner_mean, 0.0, m, q, weight="alg", wvar=(e_out, g1),
                        what="outer triangle integral")

    def f(x):
        return (top - x) ** g1 * inner_mean(x)

    return adaptive(f, 0.0, m, q, weight="alg", wvar=(e_out, 0.0),
                    what="outer triangle integral")


def cross_cov_X(t, s, lam, lam2, q=DEFAULT_QUAD):
    """E[X(t, lam) X(s, lam2)] from the double integral over [0, t] x [0, s]."""
    t, s, lam, lam2 = float(t), float(s), float(lam), float(lam2)
    _check_times(t, s)
    _check_lams(lam, lam2)
    m = min(t, s)
    if m == 0.0:
        return 0.0
    gamma = lam + lam2 - 2.0
    d = lam - lam2
    above = _triangle(t, m, -d, d, gamma, q)   # y > z
    below = _triangle(s, m, d, -d, gamma, q)   # y < z
    return (beta_fn(2.0 - lam - lam2, lam2 - 0.5) * above
            + beta_fn(2.0 - lam - lam2, lam - 0.5) * below)


# ---------------------------------------------------------------------------
# double integral, closed form
# ---------------------------------------------------------------------------

def _triangle_reduced(top, m, d, gamma):
    # region {0 < z < m, z < y < top} of (y - z)^gamma y^d z^-d, degree gamma
    g1 = gamma + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(top > 0, m / np.where(top > 0, top, 1.0), 0.0)
        edge_right = top ** (gamma + 2.0) * special.betainc(1.0 - d, g1, ratio) * special.beta(1.0 - d, g1)
        k = np.where(top > 0, (top - m) / np.where(top > 0, top, 1.0), 0.0)
        tail = np.where(
            top > m,
            (top - m) ** g1 * top ** d / g1 * special.hyp2f1(-d, 1.0, gamma + 2.0, k),
            0.0,
        )
        edge_top = np.where(m > 0, m ** (1.0 - d) * tail, 0.0)
    return (edge_right + edge_top) / (gamma + 2.0)


def cross_cov_reduced(t, s, lam, lam2):
    """Vectorized closed form of ``cross_cov_X`` (broadcasts over all arguments)."""
    t, s, lam, lam2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (t, s, lam, lam2)))
    if np.any(t < 0) or np.any(s < 0):
        raise DomainError("times must be nonnegative")
    if np.any(lam <= 0.5) or np.any(lam >= 1) or np.any(lam2 <= 0.5) or np.any(lam2 >= 1):
        raise DomainError("Hurst indices must lie in (1/2, 1)")
    m = np.minimum(t, s)
    gamma = lam + lam2 - 2.0
    d = lam - lam2
    above = _triangle_reduced(t, m, d, gamma)
    below = _triangle_reduced(s, m, -d, gamma)
    out = (special.beta(2.0 - lam - lam2, lam2 - 0.5) * above
           + special.beta(2.0 - lam - lam2, lam - 0.5) * below)
    out = np.where(m > 0, out, 0.0)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# variance and its derivative
# ---------------------------------------------------------------------------

def variance_R(t, h):
    """R(t) = t^(2 h(t)) / c_{h(t)}^2."""
    t = float(t)
    _check_times(t)
    if t == 0.0:
        return 0.0
    lam = h(t)
    return t ** (2.0 * lam) * c_lambda_inv_sq(lam)


def variance_R_unnormalized(t, h):
    """t^(2 h(t)), the variance convention without the c_h^-2 factor."""
    t = float(t)
    _check_times(t)
    return 0.0 if t == 0.0 else t ** (2.0 * h(t))


def _need_derivative(t, h):
    if not t > 0.0:
        raise DomainError(f"R' is evaluated at t > 0 only, got {t!r}")
    if not h.differentiable:
        raise DomainError("R' requires a differentiable Hurst function")


def variance_R_unnormalized_prime(t, h):
    """d/dt t^(2 h(t)) = 2 (h'(t) log t + h(t)/t) t^(2 h(t))."""
    t = float(t)
    _need_derivative(t, h)
    lam, dlam = h(t), h.derivative(t)
    return 2.0 * (dlam * math.log(t) + lam / t) * t ** (2.0 * lam)


def variance_R_prime(t, h):
    """d/dt R(t); the lambda-derivative of c^-2 is a fixed-step central difference."""
    t = float(t)
    _need_derivative(t, h)
    lam, dlam = h(t), h.derivative(t)
    power = t ** (2.0 * lam)
    out = 2.0 * (dlam * math.log(t) + lam / t) * power * c_lambda_inv_sq(lam)
    if dlam != 0.0:
        out += power * dc_inv_sq_dlambda(lam) * dlam
    return out


def variance_R_prime_array(ts, h):
    return np.array([variance_R_prime(t, h) for t in np.asarray(ts, dtype=float)])


# ---------------------------------------------------------------------------
# increments
# ---------------------------------------------------------------------------

def increment_second_moment(s, t, h, q=DEFAULT_QUAD):
    """E[(B_h(t) - B_h(s))^2] for 0 <= s <= t.

    int_0^s (K_{h(t)}(t, u) - K_{h(s)}(s, u))^2 du + int_s^t K_{h(t)}(t, u)^2 du,
    with the first difference split so that the part coming from t > s is
    integrated over [s, t] directly instead of subtracted.
    """
    s, t = float(s), float(t)
    _check_times(s)
    if s > t:
        raise DomainError(f"increment_second_moment needs s <= t, got s={s!r} > t={t!r}")
    if s == t:
        return 0.0
    lt = h(t)
    ls = h(s) if s > 0 else lt
    return _increment_split(s, t, lt, ls, q)


def _increment_split(s, t, lt, ls, q):
    # inner kernel integrals are held 100x tighter than the outer ones
    inner = QuadratureSpec(1e-15, max(q.rel_tol * 1e-2, 1e-13), q.max_subdivisions)
    # the result scales like c^-2 (t - s)^(2 h); keep the absolute tolerance below it
    scale = c_lambda_inv_sq(lt) * (t - s) ** (2.0 * max(lt, ls))
    outer = QuadratureSpec(min(q.abs_tol, 1e-3 * q.rel_tol * scale), q.rel_tol, q.max_subdivisions)
    late = _late_part(s, t, lt, inner, outer)
    if s == 0.0:
        return late
    lmax = max(lt, ls)
    alpha = 1.0 - 2.0 * lmax
    same = lt == ls

    def f(u):
        # K_lt(t, u) - K_ls(s, u) = u^(1/2-lt) seg(u, s, t; lt) + [K_lt(s, u) - K_ls(s, u)],
        # returned with u^(1/2 - lmax) factored out; u^(1 - 2 lmax) is the weight
        moved = kernel_segment(u, s, t, lt, inner) * u ** (lmax - lt)
        if not same and 0.0 < u < s:
            moved += kernel_index_difference(s, u, lt, ls, inner) * u ** (lmax - 0.5)
        return moved * moved

    # the integrand varies on the scale t - s just below u = s
    gap = t - s
    pts = [s - k * gap for k in (1.0, 10.0, 100.0) if s - k * gap > 0.5 * s]
    return _split_alg(f, s, alpha, pts, outer, abs(lt - ls)) + late


def _split_alg(f, s, alpha, pts, q, delta=0.0):
    """int_0^s u^alpha f(u) du with breakpoints ``pts`` below s.

    On the first piece f may carry a u^delta factor with small delta; the
    substitution u = u1 x^k, k delta = 1, keeps QAWS efficient there.
    """
    pts = sorted(pts) + [s]
    u1 = pts[0]
    k = min(1.0 / delta, 1e3) if 1e-6 <= delta < 1.0 else 1.0
    scale = u1 ** (alpha + 1.0) * k
    out = adaptive(lambda x: scale * f(u1 * x ** k), 0.0, 1.0, q, weight="alg",
                   wvar=(k * (alpha + 1.0) - 1.0, 0.0), what="early increment integral")

    def g(u):
        return u ** alpha * f(u)

    for lo, hi in zip(pts[:-1], pts[1:]):
        out += adaptive(g, lo, hi, q, what="early increment integral")
    return out


def _late_part(s, t, lt, inner, q):
    """int_s^t K_lt(t, u)^2 du."""
    beta_end = 2.0 * lt - 1.0

    def f(u):
        return _seg_over_tail(u, t, t, lt, inner) ** 2

    alpha = 1.0 - 2.0 * lt if s == 0.0 else 0.0
    if s == 0.0:
        return adaptive(f, 0.0, t, q, weight="alg", wvar=(alpha, beta_end), what="late increment integral")

    def g(u):
        return u ** (1.0 - 2.0 * lt) * f(u)

    return adaptive(g, s, t, q, weight="alg", wvar=(0.0, beta_end), what="late increment integral")


def increment_upper_bound(s, t, h, T=None):
    """2 C_T |h(t) - h(s)|^2 + 2 c_{h(s)}^-2 |t - s|^(2 h(s)) with C_T = int Phi_T^2.

    Any horizon T >= max(s, t) gives a valid bound; fixing T across calls reuses
    the cached calibration of Phi_T.
    """
    T = max(float(t), float(s)) if T is None else float(T)
    if T < max(s, t):
        raise DomainError("horizon T must cover both times")
    C_T = phi_bound_sq_integral(T, h.a, h.b)
    ls = h(s) if s > 0 else h(t)
    return 2.0 * C_T * (h(t) - h(s)) ** 2 + 2.0 * c_lambda_inv_sq(ls) * abs(t - s) ** (2.0 * ls)


def increment_second_moment_reduced(s, t, h):
    """E[(B(t) - B(s))^2] = R(s) + R(t) - 2 R(s, t) from the closed form (vectorized)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    hs, ht = _h_safe(h, s), _h_safe(h, t)
    cross = cross_cov_reduced(t, s, ht, hs)
    rs = np.where(s > 0, np.abs(s) ** (2 * hs) * _c_inv_sq_vec(hs), 0.0)
    rt = np.where(t > 0, np.abs(t) ** (2 * ht) * _c_inv_sq_vec(ht), 0.0)
    return np.maximum(rs + rt - 2.0 * cross, 0.0)


def _h_safe(h, t):
    return np.asarray(h(np.asarray(t, dtype=float)), dtype=float) * np.ones_like(t)


def _c_inv_sq_vec(lam):
    lam = np.asarray(lam, dtype=float)
    return special.beta(2.0 - 2.0 * lam, lam - 0.5) / (lam * (2.0 * lam - 1.0))


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass
class CovarianceMatrix:
    grid: TimeGrid
    entries: np.ndarray = field(repr=False)
    method: str = "inner-product"
    hurst: dict = field(default_factory=dict)

    def check(self, h=None, sym_tol=1e-12, diag_rtol=1e-6, psd_rtol=1e-10):
        """Return the list of violated invariants (empty when all hold)."""
        problems = []
        C = self.entries
        if np.max(np.abs(C - C.T), initial=0.0) > sym_tol:
            problems.append("not symmetric")
        if h is not None:
            for t, v in zip(self.grid.times, np.diag(C)):
                r = variance_R(t, h)
                if abs(v - r) > diag_rtol * max(abs(r), 1e-300) and not (r == 0 and v == 0):
                    problems.append(f"diagonal at t={t} differs from R(t)")
                    break
        if C.size:
            lo = np.linalg.eigvalsh(C).min()
            if lo < -psd_rtol * np.max(np.diag(C)):
                problems.append(f"not PSD (min eigenvalue {lo:.3g})")
        return problems


class CovarianceEntryError(MFVolterraError):
    """A covariance entry failed; carries the (i, j) position."""


def _entry(method, ti, tj, li, lj, q):
    if method == "inner-product":
        return inner_cov_X(ti, tj, li, lj, q)
    if method == "prop2-integral":
        return cross_cov_X(ti, tj, li, lj, q)
    raise DomainError(f"unknown covariance method {method!r}")


def build_cov_matrix(grid, h, method="inner-product", q=DEFAULT_QUAD):
    """Exact covariance of (B_h(t_0), ..., B_h(t_n)); the t = 0 row is zero."""
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    ts = grid.times
    n = ts.size
    C = np.zeros((n, n))
    pos = ts > 0
    if not np.any(pos):
        return CovarianceMatrix(grid, C, method, h.describe())
    lam = np.zeros(n)
    lam[pos] = h(ts[pos])
    if method == "reduced":
        idx = np.flatnonzero(pos)
        T1, T2 = np.meshgrid(ts[idx], ts[idx], indexing="ij")
        L1, L2 = np.meshgrid(lam[idx], lam[idx], indexing="ij")
        block = cross_cov_reduced(T1, T2, L1, L2)
        block = 0.5 * (block + block.T)
        np.fill_diagonal(block, ts[idx] ** (2 * lam[idx]) * _c_inv_sq_vec(lam[idx]))
        C[np.ix_(idx, idx)] = block
    else:
        for i in range(n):
            if ts[i] == 0.0:
                continue
            for j in range(i, n):
                if ts[j] == 0.0:
                    continue
                try:
                    v = _entry(method, ts[i], ts[j], lam[i], lam[j], q)
                except MFVolterraError as exc:
                    raise CovarianceEntryError(f"entry ({i}, {j}): {exc}") from exc
                C[i, j] = C[j, i] = v
    return CovarianceMatrix(grid, C, method, h.describe())


def fbm_covariance(ts, H):
    """c_H^-2 (t^2H + s^2H - |t - s|^2H) / 2 on a set of times."""
    ts = np.asarray(ts, dtype=float)
    T1, T2 = np.meshgrid(ts, ts, indexing="ij")
    return 0.5 * c_lambda_inv_sq(H) * (T1 ** (2 * H) + T2 ** (2 * H) - np.abs(T1 - T2) ** (2 * H))
