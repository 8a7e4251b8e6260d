"""Checkable consequences of the theory: occupation densities, the Berman
integral, Hölder exponents, local self-similarity, local nondeterminism and
the scaling of local times."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .covariance import (_c_inv_sq_vec, _late_part, build_cov_matrix, increment_second_moment,
                         increment_second_moment_reduced)
from .errors import DivergenceAlert, DomainError, RangeError, RegressionError
from .hurst import DEFAULT_QUAD, QuadratureSpec, TimeGrid
from .quadrature import adaptive
from .simulate import cholesky_with_jitter
from .specfun import c_lambda_inv_sq, c_lambda_sq

LND_QUAD = QuadratureSpec(1e-15, 1e-11, 400)


# ---------------------------------------------------------------------------
# local time
# ---------------------------------------------------------------------------

@dataclass
class LocalTimeEstimate:
    x_bins: np.ndarray
    t_checkpoints: np.ndarray
    density: np.ndarray = field(repr=False)
    bin_width: float
    estimator: str = "binned"

    @property
    def centers(self):
        return 0.5 * (self.x_bins[1:] + self.x_bins[:-1])


def _as_path(path, times):
    path = np.asarray(path, dtype=float)
    times = np.asarray(getattr(times, "times", times), dtype=float)
    if path.ndim != 1 or path.shape != times.shape:
        raise DomainError("path and times must be 1-D arrays of equal length")
    return path, times


def fd_bin_width(values):
    """Freedman-Diaconis width 2 IQR n^(-1/3), floored at range/n and at 1e-9 x max |value|.

    The floors keep the bin count at most the sample size when the IQR
    collapses; an (essentially) all-zero sample gets width 1.
    """
    values = np.asarray(values, dtype=float)
    q75, q25 = np.percentile(values, [75, 25])
    w = 2.0 * (q75 - q25) * values.size ** (-1.0 / 3.0)
    scale = float(np.max(np.abs(values)))
    if scale < 1e-150:
        return 1.0
    span = float(values.max() - values.min())
    return float(max(w, span / values.size, 1e-9 * scale))


def default_bins(path, width=None):
    """Uniform bins of the given (default Freedman-Diaconis) width that cover the path."""
    path = np.asarray(path, dtype=float)
    w = fd_bin_width(path) if width is None else float(width)
    lo = math.floor(path.min() / w) * w
    k = max(int(math.ceil((path.max() - lo) / w)), 1)
    edges = lo + w * np.arange(k + 2)
    return edges


def _bin_index(values, x_bins):
    x_bins = np.asarray(x_bins, dtype=float)
    if x_bins.ndim != 1 or x_bins.size < 2 or np.any(np.diff(x_bins) <= 0):
        raise DomainError("bin edges must be strictly increasing with at least two entries")
    idx = np.searchsorted(x_bins, values, side="right") - 1
    # right edge belongs to the last bin
    idx = np.where(values == x_bins[-1], x_bins.size - 2, idx)
    if np.any(idx < 0) or np.any(idx > x_bins.size - 2):
        raise RangeError("path leaves the binned range")
    return idx


def local_time_binned(path, times, x_bins=None, t_checkpoints=None):
    """L(t, k) = (1/dx_k) sum_{t_i < t} (t_{i+1} - t_i) 1{B(t_i) in bin k}."""
    path, times = _as_path(path, times)
    if x_bins is None:
        x_bins = default_bins(path)
    x_bins = np.asarray(x_bins, dtype=float)
    cps = times if t_checkpoints is None else np.asarray(t_checkpoints, dtype=float)
    if not np.all(np.isin(cps, times)):
        raise DomainError("checkpoints must be grid times")
    idx = _bin_index(path[:-1], x_bins)
    dt = np.diff(times)
    widths = np.diff(x_bins)
    occ = np.zeros((times.size, widths.size))
    np.add.at(occ[1:], (np.arange(dt.size), idx), dt)
    occ = np.cumsum(occ, axis=0)
    rows = np.searchsorted(times, cps)
    density = occ[rows] / widths
    return LocalTimeEstimate(x_bins, cps, density, float(np.mean(widths)), "binned")


def gaussian_density(x, eps):
    return np.exp(-0.5 * np.square(x) / eps) / np.sqrt(2.0 * np.pi * eps)


def local_time_kernel(path, times, x, t, eps):
    """sum_{t_i < t} (t_{i+1} - t_i) p_eps(B(t_i) - x), p_eps the N(0, eps) density."""
    if not eps > 0:
        raise DomainError("bandwidth eps must be positive")
    path, times = _as_path(path, times)
    m = times[:-1] < t
    return float(np.sum(np.diff(times)[m] * gaussian_density(path[:-1][m] - x, eps)))


def occupation_identity_residual(path, times, g, x_bins=None):
    """|sum dt g(B(t_i)) - sum_bins g(center) L(T, bin) dx|."""
    path, times = _as_path(path, times)
    est = local_time_binned(path, times, x_bins, times[-1:])
    lhs = np.sum(np.diff(times) * g(path[:-1]))
    rhs = np.sum(g(est.centers) * est.density[-1] * np.diff(est.x_bins))
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# Berman integral
# ---------------------------------------------------------------------------

def _cell_power_integrals(k, d, lam):
    """int over a d x d cell at offset k d of |t - s|^-lam, via second differences of
    G(x) = |x|^(2 - lam) / ((1 - lam)(2 - lam))."""
    def G(x):
        return np.abs(x) ** (2.0 - lam) / ((1.0 - lam) * (2.0 - lam))
    return G((k + 1) * d) - 2.0 * G(k * d) + G((k - 1) * d)


def berman_integral(h, T, n=256, q=DEFAULT_QUAD, method="reduced"):
    """int_0^T int_0^T ds dt / sqrt(E|B(t) - B(s)|^2) on an n x n cell grid.

    Each cell uses the exact integral of c_{h(t)} |t - s|^(-h(t)) times the ratio
    rho = sqrt(c^-2 |t - s|^(2h) / E|B(t) - B(s)|^2) at the cell midpoint; on
    diagonal cells rho = 1 (the near-diagonal asymptotic).  ``method`` selects
    the closed-form ("reduced") or quadrature ("quadrature") second moments.
    """
    T = float(T)
    if T < 0:
        raise DomainError("T must be nonnegative")
    if n < 16:
        raise DomainError("berman_integral needs n >= 16")
    if T == 0.0:
        return 0.0
    d = T / n
    mids = (np.arange(n) + 0.5) * d
    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    upper = I < J  # s = mids[I] < t = mids[J]
    s, t = mids[I[upper]], mids[J[upper]]
    lam_t = np.asarray(h(t), dtype=float)
    if method == "reduced":
        M = increment_second_moment_reduced(s, t, h)
    elif method == "quadrature":
        M = np.array([increment_second_moment(a, b, h, q) for a, b in zip(s, t)])
    else:
        raise DomainError(f"unknown method {method!r}")
    local = _c_inv_sq_vec(lam_t) * (t - s) ** (2.0 * lam_t)
    rho = np.sqrt(local / M)
    off = np.sum(rho * np.sqrt(1.0 / _c_inv_sq_vec(lam_t))
                 * _cell_power_integrals((J - I)[upper].astype(float), d, lam_t))
    lam_d = np.asarray(h(mids), dtype=float)
    diag = np.sum(np.sqrt(1.0 / _c_inv_sq_vec(lam_d)) * _cell_power_integrals(0.0, d, lam_d))
    return float(2.0 * off + diag)


def berman_refinement(h, T, n=256, q=DEFAULT_QUAD, method="reduced"):
    """(value(n), value(2n), relative change); raises DivergenceAlert on >10% growth."""
    v1 = berman_integral(h, T, n, q, method)
    v2 = berman_integral(h, T, 2 * n, q, method)
    if v1 > 0 and v2 > 1.1 * v1:
        raise DivergenceAlert(f"Berman integral grew from {v1:.6g} to {v2:.6g} on refinement")
    rel = abs(v2 - v1) / v1 if v1 > 0 else 0.0
    return v1, v2, rel


def berman_constant_oracle(H, T=1.0):
    """2 c_H T^(2-H) / ((1-H)(2-H)) for constant h = H."""
    return 2.0 * math.sqrt(c_lambda_sq(H)) * T ** (2.0 - H) / ((1.0 - H) * (2.0 - H))


# ---------------------------------------------------------------------------
# Hölder exponent and local self-similarity
# ---------------------------------------------------------------------------

@dataclass
class HolderReport:
    t0: float
    estimate: float
    eps_min: float
    eps_max: float
    residual: float


def default_eps_range(h):
    # for varying h the (h(t) - h(s))^2 term bends the log-log line at eps ~ 1e-2
    if h.a == h.b:
        return np.geomspace(1e-4, 1e-2, 9)
    return np.geomspace(1e-6, 1e-4, 9)


def holder_exponent(t0, h, eps_range=None, q=DEFAULT_QUAD, T=None):
    """Half the least-squares slope of log E|B(t0 + eps) - B(t0)|^2 against log eps."""
    eps = default_eps_range(h) if eps_range is None else np.asarray(eps_range, dtype=float)
    if eps.ndim != 1 or eps.size < 5:
        raise DomainError("eps_range needs at least 5 points")
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise DomainError("eps_range must lie in (0, 1)")
    if T is not None and t0 + eps.max() > T:
        raise DomainError("t0 + max eps exceeds the horizon")
    if eps.max() / eps.min() < 1.0 + 1e-9:
        raise RegressionError("eps_range collapses to a point")
    M = np.array([increment_second_moment(t0, t0 + e, h, q) for e in eps])
    x, y = np.log(eps), np.log(M)
    (slope, icpt), res = np.polyfit(x, y, 1, full=True)[:2]
    resid = float(np.sqrt(res[0] / eps.size)) if res.size else 0.0
    return HolderReport(float(t0), float(slope / 2.0), float(eps.min()), float(eps.max()), resid)


def lass_covariance_limit(t0, eps, u, v, h, q=DEFAULT_QUAD):
    """(eps^-2h E[(B(t0+eps u) - B(t0))(B(t0+eps v) - B(t0))], its fBm limit)."""
    if not t0 > 0 or not eps > 0 or u < 0 or v < 0:
        raise DomainError("need t0 > 0, eps > 0, u, v >= 0")
    lam = h(t0)
    a, b = t0 + eps * u, t0 + eps * v

    def M(s, t):
        s, t = min(s, t), max(s, t)
        return increment_second_moment(s, t, h, q)

    cov = 0.5 * (M(t0, a) + M(t0, b) - M(a, b))
    rescaled = cov * eps ** (-2.0 * lam)
    limit = 0.5 * c_lambda_inv_sq(lam) * (u ** (2 * lam) + v ** (2 * lam) - abs(u - v) ** (2 * lam))
    return rescaled, limit


def increment_lower_margin(h, ts, eps_values=(1e-3, 1e-4), q=DEFAULT_QUAD):
    """(min over the lattice of eps^-2h(t) E|B(t+eps) - B(t)|^2, half the min of c^-2_{h(t)})."""
    ts = np.asarray(ts, dtype=float)
    vals = [increment_second_moment(t, t + e, h, q) * e ** (-2.0 * h(t))
            for t in ts for e in eps_values]
    floor = 0.5 * min(c_lambda_inv_sq(h(t)) for t in ts)
    return float(min(vals)), float(floor)


# ---------------------------------------------------------------------------
# local nondeterminism
# ---------------------------------------------------------------------------

def _check_times_increasing(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise DomainError("need at least two times")
    if times[0] <= 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must satisfy 0 < t_1 < ... < t_m")
    return times


def _cov(times, h, q, method):
    grid = TimeGrid(np.concatenate([[0.0], times]))
    return build_cov_matrix(grid, h, method, q).entries[1:, 1:]


def lnd_ratio(times, h, q=LND_QUAD, method="inner-product"):
    """Var[B(t_m) - B(t_m-1) | B(t_1..t_m-1)] / Var[B(t_m) - B(t_m-1)] by Schur complement."""
    times = _check_times_increasing(times)
    C = _cov(times, h, q, method)
    past, last = C[:-1, :-1], C[:-1, -1]
    L, _ = cholesky_with_jitter(past)
    w = linalg.solve_triangular(L, last, lower=True)
    cond = C[-1, -1] - w @ w
    m = times.size
    if m == 2 and method != "reduced":
        var = increment_second_moment(times[0], times[1], h, q)
    else:
        var = C[-1, -1] + C[-2, -2] - 2.0 * C[-2, -1]
    return float(cond / var)


def lnd_whole_past_bound(times, h, q=LND_QUAD):
    """int_{t_m-1}^{t_m} K_{h(t_m)}(t_m, u)^2 du / Var[B(t_m) - B(t_m-1)]."""
    times = _check_times_increasing(times)
    s, t = times[-2], times[-1]
    lt = h(t)
    inner = QuadratureSpec(1e-15, max(q.rel_tol * 1e-2, 1e-13), q.max_subdivisions)
    own = _late_part(s, t, lt, inner, q)
    return float(own / increment_second_moment(s, t, h, q))


def lnd_I_lower_bound(a, b, q=DEFAULT_QUAD):
    """I(a, b) = int int_[0,1]^2 |y - z|^(2b-2) int_{Psi(y,z)}^inf (v-1)^(1-2b) v^(a-3/2) dv dy dz.

    Psi = max(y/z, z/y, 2) is symmetric, and z = s y reduces the outer double
    integral to (1/b) int_0^1 (1 - s)^(2b-2) F(max(1/s, 2)) ds.  The inner F uses
    v = 1 + w/(1 - w): F(psi) = int_{1 - 1/psi}^1 w^(1-2b) (1 - w)^(2b-a-3/2) dw.
    """
    if not 0.5 < a < b < 1.0:
        raise DomainError("need 1/2 < a < b < 1")
    e_end = 2.0 * b - a - 1.5

    def F(psi):
        w0 = 1.0 - 1.0 / psi
        return adaptive(lambda w: w ** (1.0 - 2.0 * b), w0, 1.0, q, weight="alg",
                        wvar=(0.0, e_end), what="LND inner integral")

    F2 = F(2.0)
    # for s >= 1/2 the inner integral is the constant F(2)
    upper = F2 * 0.5 ** (2.0 * b - 1.0) / (2.0 * b - 1.0)
    lower = adaptive(lambda s: (1.0 - s) ** (2.0 * b - 2.0) * (F(1.0 / s) if s > 0 else 0.0),
                     0.0, 0.5, q, what="LND outer integral")
    return (lower + upper) / b


def lnd_inner_oracle(psi, a, b):
    """Closed form of the inner integral: the incomplete beta B(1/psi; 2b - a - 1/2, 2 - 2b)."""
    p, r = 2.0 * b - a - 0.5, 2.0 - 2.0 * b
    return special.betainc(p, r, 1.0 / psi) * special.beta(p, r)


def quadratic_form_margin_matrix(S):
    """Smallest generalized eigenvalue of (S, diag S)."""
    S = np.asarray(S, dtype=float)
    d = np.sqrt(np.diag(S))
    if np.any(d <= 0):
        raise DomainError("increment variances must be positive")
    corr = S / np.outer(d, d)
    return float(max(np.linalg.eigvalsh(0.5 * (corr + corr.T)).min(), 0.0))


def lnd_quadratic_form_margin(times, h, q=LND_QUAD, method="inner-product"):
    """Best C_m with Var[sum u_j dB_j] >= C_m sum u_j^2 Var[dB_j], increments over 0 < t_1 < ... < t_m."""
    times = _check_times_increasing(times)
    C = np.zeros((times.size + 1,) * 2)
    C[1:, 1:] = _cov(times, h, q, method)
    D = np.eye(times.size + 1)[1:] - np.eye(times.size + 1)[:-1]
    return quadratic_form_margin_matrix(D @ C @ D.T)


# ---------------------------------------------------------------------------
# regularity scaling of local times
# ---------------------------------------------------------------------------

@dataclass
class ScalingReport:
    space_exponent: float
    space_residual: float
    time_exponent: float
    time_residual: float
    space_scales: list
    time_scales: list


def _fit(x, y):
    (slope, icpt), res = np.polyfit(x, y, 1, full=True)[:2]
    return float(slope), float(np.sqrt(res[0] / x.size)) if res.size else 0.0


def regularity_scaling(ens, H, config=None):
    """Fitted exponents of x -> L(I, x) increments and of |I| -> sup_x L(I, x).

    Space: on I = [0, T] with per-path Freedman-Diaconis bins, the median over
    paths of the mean |L(x) - L(x + k dx)| is regressed on k = 1, 2, 4, ...
    (spacings available on every path)
    Time: over dyadic intervals of length T 2^-j (at least ``min_points`` grid
    points), each (path, interval) gets its own Freedman-Diaconis bins, and the
    median over paths of the mean sup_x L(I, x) is regressed on |I|.
    """
    cfg = {"min_paths": 500, "min_points": 2 ** 12, "min_scales": 4, "interval_points": 64}
    cfg.update(config or {})
    P, times = ens.paths, ens.grid.times
    if P.shape[0] < cfg["min_paths"] or times.size < cfg["min_points"]:
        raise DomainError(f"regularity_scaling needs >= {cfg['min_paths']} paths on "
                          f">= {cfg['min_points']} points")
    if not 0.5 < H < 1:
        raise DomainError("H must lie in (1/2, 1)")

    # space
    per_path = {}
    for path in P:
        L = local_time_binned(path, times, None, times[-1:]).density[-1]
        k = 1
        while k <= L.size - 2:  # at least two pairs per spacing
            per_path.setdefault(k, []).append(np.mean(np.abs(L[k:] - L[:-k])))
            k *= 2
    ks = sorted(k for k, v in per_path.items() if len(v) == P.shape[0])
    if len(ks) < cfg["min_scales"]:
        raise DomainError("insufficient resolution: fewer than min_scales dyadic spacings")
    med = np.array([np.median(per_path[k]) for k in ks])
    sx, rx = _fit(np.log(ks), np.log(med))

    # time
    n = times.size - 1
    lengths, sups = [], []
    m = n
    while m >= cfg["interval_points"]:
        vals = []
        for path in P:
            per = []
            for start in range(0, n - m + 1, m):
                seg, tt = path[start:start + m + 1], times[start:start + m + 1]
                per.append(local_time_binned(seg, tt, None, tt[-1:]).density[-1].max())
            vals.append(np.mean(per))
        lengths.append(times[m] - times[0])
        sups.append(np.median(vals))
        m //= 2
    if len(lengths) < cfg["min_scales"]:
        raise DomainError("insufficient resolution: fewer than min_scales dyadic interval lengths")
    st, rt = _fit(np.log(lengths), np.log(sups))
    return ScalingReport(sx, rx, st, rt, [int(k) for k in ks], [float(x) for x in lengths])
