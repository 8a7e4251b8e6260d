"""Computable pieces of the Tanaka formula for B_h.

The pathwise part is the weighted occupation functional
int_0^t p_eps(B(s) - a) dR(s); the stochastic (divergence) integral is not
pathwise computable and only enters through its zero expectation.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .analysis import _as_path, _bin_index, gaussian_density, local_time_binned
from .covariance import (build_cov_matrix, variance_R, variance_R_prime,
                         variance_R_unnormalized, variance_R_unnormalized_prime)
from .errors import DomainError
from .hurst import DEFAULT_QUAD, HurstFunction, TimeGrid
from .quadrature import adaptive
from .simulate import CHUNK, sample_cholesky

CONVENTIONS = ("normalized", "remark13-unnormalized")


@dataclass
class WeightedLocalTime:
    a: float
    t_checkpoints: np.ndarray
    values: np.ndarray = field(repr=False)
    convention: str = "normalized"


def _R(t, h, convention):
    if convention == "normalized":
        return variance_R(t, h)
    if convention == "remark13-unnormalized":
        return variance_R_unnormalized(t, h)
    raise DomainError(f"convention must be one of {CONVENTIONS}")


def _R_prime(t, h, convention):
    if convention == "normalized":
        return variance_R_prime(t, h)
    if convention == "remark13-unnormalized":
        return variance_R_unnormalized_prime(t, h)
    raise DomainError(f"convention must be one of {CONVENTIONS}")


def r_prime_on_grid(times, h, convention="normalized"):
    """R'(t_i) on the grid; t = 0 takes the value at the next grid time."""
    times = np.asarray(times, dtype=float)
    at = times.copy()
    if at.size > 1 and at[0] == 0.0:
        at[0] = at[1]
    return np.array([_R_prime(t, h, convention) for t in at])


def _dR_weights(times, h, t, convention):
    """Left-endpoint weights R'(t_i)(t_{i+1} - t_i) for the cells [t_i, t_{i+1}) inside [0, t]."""
    w = r_prime_on_grid(times, h, convention)[:-1] * np.diff(times)
    return np.where(times[1:] <= t * (1 + 1e-14), w, 0.0)


def smoothed_weighted_occupation(path, times, a, eps, h, t=None, convention="normalized"):
    """sum_i p_eps(B(t_i) - a) R'(t_i) (t_{i+1} - t_i) over cells inside [0, t].

    ``path`` may be one path or an (n_paths, n_times) array.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    times = np.asarray(getattr(times, "times", times), dtype=float)
    P = np.asarray(path, dtype=float)
    if P.shape[-1] != times.size:
        raise DomainError("path length does not match the time grid")
    t = times[-1] if t is None else float(t)
    w = _dR_weights(times, h, t, convention)
    return gaussian_density(P[..., :-1] - a, eps) @ w


def weighted_local_time(path, times, a, h, x_bins=None, t_checkpoints=None, convention="normalized"):
    """Stieltjes sums of R' against increments of the binned local time at the bin holding a.

    R' is taken at the left end of each checkpoint interval (right end for the
    interval starting at 0).  Values are cumulative from time 0.
    """
    path, times = _as_path(path, times)
    est = local_time_binned(path, times, x_bins, times if t_checkpoints is None else t_checkpoints)
    k = _bin_index(np.array([a]), est.x_bins)[0]
    cps = est.t_checkpoints
    L = est.density[:, k]
    dL = np.diff(L)
    left = cps[:-1].copy()
    if left.size and left[0] == 0.0:
        left[0] = cps[1]
    rp = np.array([_R_prime(s, h, convention) for s in left])
    values = np.concatenate([[0.0], np.cumsum(rp * dL)])
    return WeightedLocalTime(float(a), cps, values, convention)


def abs_gaussian_mean(var, a):
    """E|N(0, var) - a|."""
    if var <= 0.0:
        return abs(a)
    sd = math.sqrt(var)
    z = a / sd
    return sd * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * z * z) + a * (2.0 * stats.norm.cdf(z) - 1.0)


def deterministic_side(h, a, eps, t, q=DEFAULT_QUAD, convention="normalized"):
    """int_0^t p_{R(s) + eps}(a) R'(s) ds by quadrature."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if t <= 0:
        return 0.0

    def f(s):
        if s == 0.0:
            return 0.0
        return gaussian_density(a, _R(s, h, convention) + eps) * _R_prime(s, h, convention)

    return adaptive(f, 0.0, t, q, what="Tanaka deterministic side")


def deterministic_side_closed(h, a, eps, t, convention="normalized"):
    """E|N(0, R(t) + eps) - a| - E|N(0, eps) - a|: the same integral, since
    d/dv E|N(0, v) - a| = p_v(a)."""
    return abs_gaussian_mean(_R(t, h, convention) + eps, a) - abs_gaussian_mean(eps, a)


@dataclass
class TanakaResult:
    a: float
    eps: float
    t: float
    mc_mean: float
    mc_se: float
    deterministic: float

    @property
    def z(self):
        return (self.mc_mean - self.deterministic) / self.mc_se if self.mc_se > 0 else 0.0

    @property
    def passed(self):
        return abs(self.mc_mean - self.deterministic) <= 3.0 * self.mc_se

    def as_dict(self):
        return {"a": self.a, "eps": self.eps, "t": self.t, "mc_mean": self.mc_mean,
                "mc_se": self.mc_se, "deterministic": self.deterministic, "pass": self.passed}


def simulate_functionals(h, grid, n_paths, seed, funcs, cov_method="reduced", q=DEFAULT_QUAD,
                         threads=None):
    """Evaluate per-path functionals on Cholesky paths generated chunk by chunk.

    ``funcs`` maps names to callables (paths block, times) -> per-path values.
    Returns name -> array of length n_paths.
    """
    cov = build_cov_matrix(grid, h, cov_method, q)
    out = {k: [] for k in funcs}
    for start in range(0, n_paths, 8 * CHUNK):
        m = min(8 * CHUNK, n_paths - start)
        ens = sample_cholesky(grid, h, m, seed, cov=cov, threads=threads, first_path=start)
        for k, f in funcs.items():
            out[k].append(np.asarray(f(ens.paths, grid.times)))
    return {k: np.concatenate(v) for k, v in out.items()}


def tanaka_lattice(h, a_values, eps_values, t_values, n_paths, seed, q=DEFAULT_QUAD,
                   n_grid=1024, T=None, convention="normalized", threads=None):
    """Expectation identity E int p_eps(B - a) dR = int p_{R+eps}(a) dR on a lattice.

    One ensemble on a uniform grid of [0, T] (T = max t) serves every lattice point.
    """
    if not h.differentiable:
        raise DomainError("the Tanaka functional needs a differentiable Hurst function")
    T = max(t_values) if T is None else T
    grid = TimeGrid.uniform(T, n_grid)
    keys = [(a, e, t) for a in a_values for e in eps_values for t in t_values]
    funcs = {k: (lambda P, ts, k=k: smoothed_weighted_occupation(P, ts, k[0], k[1], h, k[2], convention))
             for k in keys}
    vals = simulate_functionals(h, grid, n_paths, seed, funcs, q=q, threads=threads)
    results = []
    for (a, e, t) in keys:
        v = vals[(a, e, t)]
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("inf")
        results.append(TanakaResult(float(a), float(e), float(t), float(np.mean(v)), se,
                                    deterministic_side(h, a, e, t, q, convention)))
    return results


def tanaka_expectation_identity(h, a, eps, t, n_paths, seed, q=DEFAULT_QUAD, n_grid=1024,
                                convention="normalized", threads=None):
    """(mc_mean, mc_se, deterministic) for one (a, eps, t)."""
    if t <= 0:
        return 0.0, 0.0, 0.0
    r = tanaka_lattice(h, [a], [eps], [t], n_paths, seed, q, n_grid, None, convention, threads)[0]
    return r.mc_mean, r.mc_se, r.deterministic


def tanaka_remainder_check(h, a, eps, t, n_paths, seed, q=DEFAULT_QUAD, n_grid=1024, threads=None):
    """Mean over paths of |B(t) - a| - |a| - smoothed functional, with its standard error
    and expected value.

    The divergence integral is centered, so only the smoothing and the
    discretization leave a nonzero expectation; the smoothing part is
    E|N(0,R)-a| - E|N(0,R+eps)-a| + E|N(0,eps)-a| - |a| (vanishes as eps -> 0).
    """
    grid = TimeGrid.uniform(t, n_grid)

    def rem(P, ts):
        return np.abs(P[:, -1] - a) - abs(a) - smoothed_weighted_occupation(P, ts, a, eps, h, t)

    v = simulate_functionals(h, grid, n_paths, seed, {"r": rem}, q=q, threads=threads)["r"]
    R = variance_R(t, h)
    expected = (abs_gaussian_mean(R, a) - abs_gaussian_mean(R + eps, a)
                + abs_gaussian_mean(eps, a) - abs(a))
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size)), float(expected)


# ---------------------------------------------------------------------------
# degenerate example: h(u) = 1 / log u on (e, e^2), where u^(2 h(u)) = e^2
# ---------------------------------------------------------------------------

def inverse_log_hurst(s, t):
    """h(u) = 1/log u on [s, t] inside (e, e^2)."""
    s, t = float(s), float(t)
    if not (math.e < s < t < math.e ** 2):
        raise DomainError("the 1/log u example needs e < s < t < e^2")
    return HurstFunction(lambda u: 1.0 / np.log(np.asarray(u, dtype=float))[()],
                         1.0 / math.log(t), 1.0 / math.log(s),
                         derivative=lambda u: (-1.0 / (np.asarray(u, dtype=float)
                                                       * np.log(np.asarray(u, dtype=float)) ** 2))[()],
                         holder_exponent=1.0, descriptor="custom",
                         params={"formula": "1/log u", "interval": [s, t]})


def remark13_case(s, t, n=201, step=1e-3):
    """Check that u^(2 h(u)) = e^2 on [s, t] while the normalized variance is not constant."""
    h = inverse_log_hurst(s, t)
    inner = np.linspace(s, t, n)
    # finite differences need points step away from the ends
    us = np.clip(inner, s + step, t - step)
    Ru = np.array([variance_R_unnormalized(u, h) for u in inner])
    fd_u = np.array([(variance_R_unnormalized(u + step, h) - variance_R_unnormalized(u - step, h))
                     / (2 * step) for u in us])
    analytic_u = np.array([variance_R_unnormalized_prime(u, h) for u in inner])
    Rn = np.array([variance_R(u, h) for u in inner])
    fd_n = np.array([(variance_R(u + step, h) - variance_R(u - step, h)) / (2 * step) for u in us])
    return {
        "interval": [s, t],
        "unnormalized_max_deviation_from_e2": float(np.max(np.abs(Ru - math.e ** 2))),
        "unnormalized_fd_derivative_max": float(np.max(np.abs(fd_u))),
        "unnormalized_analytic_derivative_max": float(np.max(np.abs(analytic_u))),
        "normalized_range": [float(Rn.min()), float(Rn.max())],
        "normalized_fd_derivative_max": float(np.max(np.abs(fd_n))),
        "unnormalized_constant": bool(np.max(np.abs(Ru - math.e ** 2)) <= 1e-10),
        "unnormalized_derivative_zero": bool(np.max(np.abs(fd_u)) <= 1e-10
                                             and np.max(np.abs(analytic_u)) <= 1e-10),
        "normalized_not_constant": bool(np.max(np.abs(fd_n)) > 1e-3),
    }
