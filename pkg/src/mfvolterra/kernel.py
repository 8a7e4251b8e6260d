"""The Volterra kernel K_H(t, u) and its multifractional version K_{h(t)}(t, u).

    K_H(t, u) = u^(1/2 - H) * int_u^t (y - u)^(H - 3/2) y^(H - 1/2) dy,   0 < u <= t.

The (y - u)^(H - 3/2) singularity is removed with y = u + w^p, p = 1/(H - 1/2),
which turns the integrand into the bounded p (u + w^p)^(H - 1/2).
"""

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .hurst import DEFAULT_QUAD, QuadratureSpec
from .quadrature import adaptive


def _check_H(H):
    H = float(H)
    if not 0.5 < H < 1.0:
        raise DomainError(f"H must lie in (1/2, 1), got {H!r}")
    return H


def _check_pair(t, u):
    t, u = float(t), float(u)
    if not u > 0.0:
        raise DomainError(f"kernel evaluated at u = {u!r}; u must be positive")
    if u > t:
        raise DomainError(f"kernel needs u <= t, got u = {u!r} > t = {t!r}")
    return t, u


def kernel_segment(u, lo, hi, H, q=DEFAULT_QUAD):
    """int_lo^hi (y - u)^(H - 3/2) y^(H - 1/2) dy for 0 <= u <= lo <= hi."""
    if hi <= lo:
        return 0.0
    p = 1.0 / (H - 0.5)
    e = H - 0.5
    w_lo = (lo - u) ** e
    w_hi = (hi - u) ** e
    if u == 0.0:
        # integrand p * w^(p e) = p * w exactly
        return 0.5 * p * (w_hi * w_hi - w_lo * w_lo)

    def f(w):
        return p * (u + w ** p) ** e

    # the integrand bends where w^p ~ u
    knee = u ** e
    return adaptive(f, w_lo, w_hi, q, points=(knee, 4.0 * knee), what="kernel integral")


def eval_KH(t, u, H, q=DEFAULT_QUAD):
    """K_H(t, u) for 0 < u <= t and H in (1/2, 1)."""
    t, u = _check_pair(t, u)
    H = _check_H(H)
    if u == t:
        return 0.0
    return u ** (0.5 - H) * kernel_segment(u, u, t, H, q)


def eval_Kh(t, u, h, q=DEFAULT_QUAD):
    """K_{h(t)}(t, u): the Hurst index is frozen at h(t)."""
    return eval_KH(t, u, h(t), q)


def eval_dKH_dH(t, u, H, q=DEFAULT_QUAD):
    """Partial derivative of K_lambda(t, u) in lambda at lambda = H.

    Sum of (-log u) K_H(t, u) and u^(1/2 - H) int_u^t (y-u)^(H-3/2) y^(H-1/2)
    (log(y - u) + log y) dy, both integrals taken after the power substitution.
    """
    t, u = _check_pair(t, u)
    H = _check_H(H)
    if u == t:
        return 0.0
    p = 1.0 / (H - 0.5)
    e = H - 0.5
    w_hi = (t - u) ** e

    def f(w):
        y = u + w ** p
        lw = p * math.log(w) if w > 0.0 else 0.0
        return p * y ** e * (lw + math.log(y))

    knee = u ** e
    logged = adaptive(f, 0.0, w_hi, q, points=(knee,), what="log-weighted kernel integral")
    base = kernel_segment(u, u, t, H, q)
    return u ** (0.5 - H) * (-math.log(u) * base + logged)


# --- the bound Phi_T(s) = C_{a,b,T} (1 v |log s|) s^(1/2 - b) -----------------

_CAL_POINTS = 30
_CAL_SAFETY = 1.1


def _phi_shape(s, b):
    return max(1.0, abs(math.log(s))) * s ** (0.5 - b)


@lru_cache(maxsize=64)
def phi_constant(a, b, T):
    """Calibrated C_{a,b,T}: 1.1 x the lattice maximum of |dK/dlambda| / shape.

    Lattice: 30 geometric s in [1e-4 T, T), 30 t uniformly in (s, T],
    30 lambda uniformly in [a, b].
    """
    a, b, T = float(a), float(b), float(T)
    q = QuadratureSpec(1e-10, 1e-8, 200)
    best = 0.0
    s_vals = np.geomspace(1e-4 * T, T, _CAL_POINTS + 1)[:-1]
    lams = np.linspace(a, b, _CAL_POINTS) if b > a else np.array([a])
    lams = np.clip(lams, 0.5 + 1e-6, 1 - 1e-6)
    for s in s_vals:
        shape = _phi_shape(s, b)
        for j in range(1, _CAL_POINTS + 1):
            t = s + (T - s) * j / _CAL_POINTS
            for lam in lams:
                best = max(best, abs(eval_dKH_dH(t, s, lam, q)) / shape)
    return _CAL_SAFETY * best


def phi_bound(s, T, a, b):
    """Square-integrable majorant of |dK_lambda(t, s)/dlambda| over t, lambda."""
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"phi_bound needs s > 0, got {s!r}")
    if s > T:
        raise DomainError(f"phi_bound needs s <= T, got s = {s!r} > T = {T!r}")
    return phi_constant(float(a), float(b), float(T)) * _phi_shape(s, b)


def phi_bound_sq_integral(T, a, b):
    """int_0^T Phi_T(s)^2 ds, the constant C_T of the lambda-increment bound."""
    C = phi_constant(float(a), float(b), float(T))
    e = 1.0 - 2.0 * b  # > -1
    # split at min(T, 1/e) where |log s| crosses 1
    edge = min(T, math.exp(-1.0))

    def g(s):
        return _phi_shape(s, b) ** 2

    # s^(1-2b) log^2 s near 0: exact through the substitution s = v^(1/(1+e))
    r = 1.0 / (1.0 + e)

    def g_sub(v):
        if v == 0.0:
            return 0.0
        s = v ** r
        return r * math.log(s) ** 2

    left = adaptive(g_sub, 0.0, edge ** (1.0 + e), what="Phi_T^2 integral")
    right = adaptive(g, edge, T, what="Phi_T^2 integral") if T > edge else 0.0
    return C * C * (left + right)


def total_variation_K(s, T, h, n, q=DEFAULT_QUAD):
    """Variation of t -> K_{h(t)}(t, s) over n equally spaced points of [s, T].

    The first point is t = s where the kernel vanishes (limit t -> s+).
    """
    s, T = float(s), float(T)
    if not 0.0 < s < T:
        raise DomainError(f"total_variation_K needs 0 < s < T, got s={s!r}, T={T!r}")
    n = int(n)
    if n < 2:
        raise DomainError("total_variation_K needs at least 2 partition points")
    ts = s + (T - s) * np.arange(n) / (n - 1)
    ts[-1] = T
    vals = np.array([0.0] + [eval_Kh(t, s, h, q) for t in ts[1:]])
    return float(np.sum(np.abs(np.diff(vals))))


def k4_variation_bound(s, T, h, q=DEFAULT_QUAD, n_var=4096):
    """Majorant of the variation of t -> K_{h(t)}(t, s) on (s, T], T <= 1.

    Sum of s^(1/2-b) int_s^T (y-s)^(a-3/2) y^(a-1/2) dy (moving t at fixed
    index) and Var(h) * Phi_T(s) (moving the index at fixed t).
    """
    if T > 1.0:
        raise DomainError("k4_variation_bound is stated for T <= 1")
    a, b = h.a, h.b
    a_eff = max(a, 0.5 + 1e-6)
    moving_t = s ** (0.5 - b) * kernel_segment(s, s, T, a_eff, q)
    grid = np.linspace(s, T, n_var)
    var_h = float(np.sum(np.abs(np.diff(h(grid)))))
    return moving_t + var_h * phi_bound(s, T, a, b)


def kernel_index_difference(t, u, H1, H2, q=DEFAULT_QUAD):
    """K_H1(t, u) - K_H2(t, u) as a single integral of the pointwise difference.

    Both kernels use the substitution of the smaller index, so the relative
    tolerance applies to the difference itself rather than to each kernel.
    """
    t, u = _check_pair(t, u)
    H1, H2 = _check_H(H1), _check_H(H2)
    if H1 == H2 or u == t:
        return 0.0
    lo = min(H1, H2)
    p = 1.0 / (lo - 0.5)

    def term(w, lam, y):
        return p * u ** (0.5 - lam) * y ** (lam - 0.5) * w ** (p * (lam - 0.5) - 1.0)

    def f(w):
        if w == 0.0:
            # the larger-index term vanishes at w = 0
            y = u
            val = p * u ** (0.5 - lo) * y ** (lo - 0.5)
            return val if H1 == lo else -val
        y = u + w ** p
        return term(w, H1, y) - term(w, H2, y)

    # the larger-index term behaves like w^(p |H1 - H2|) near 0; w = W x^k with
    # k p |H1 - H2| = 1 smooths it
    W = (t - u) ** (lo - 0.5)
    # for tiny differences the factor is 1 + O(delta log w), which QAGS handles
    pd = p * abs(H1 - H2)
    k = min(1.0 / pd, 1e3) if 1e-6 <= pd < 1.0 else 1.0
    # cancellation limits accuracy to roundoff in the individual terms; the
    # lower-index integrand is bounded by p (t/u)^(lo - 1/2)
    scale = p * (t / u) ** (lo - 0.5) * W if u > 0.0 else p * W
    q = QuadratureSpec(max(q.abs_tol, 1e-13 * scale), q.rel_tol, q.max_subdivisions)

    if k == 1.0:
        knee = u ** (lo - 0.5)
        return adaptive(f, 0.0, W, q, points=(knee,), what="kernel index difference")
    return adaptive(lambda x: W * k * f(W * x ** k), 0.0, 1.0, q, weight="alg",
                    wvar=(k - 1.0, 0.0), what="kernel index difference")
