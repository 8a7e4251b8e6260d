"""Verification suites: named numerical checks with value, tolerance and verdict."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import analysis, covariance, tanaka
from .hurst import QuadratureSpec, TimeGrid
from .simulate import RandomSeed, sample_cholesky
from .specfun import c_lambda_inv_sq

SUITES = ("covariance", "moments", "lass", "holder", "berman", "lnd", "localtime", "tanaka")
MIN_MC_PATHS = 1000

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["suites", "checks", "passed"],
    "properties": {
        "suites": {"type": "array", "items": {"enum": list(SUITES)}},
        "passed": {"type": "boolean"},
        "hurst": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["suite", "name", "value", "tolerance", "pass"],
                "properties": {
                    "suite": {"enum": list(SUITES)},
                    "name": {"type": "string"},
                    "value": {"type": ["number", "null"]},
                    "tolerance": {"type": ["number", "null"]},
                    "pass": {"type": "boolean"},
                    "detail": {"type": "string"},
                },
            },
        },
    },
}


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self):
        d = asdict(self)
        d["pass"] = bool(d.pop("passed"))
        for k in ("value", "tolerance"):
            v = d[k]
            d[k] = None if v is None or not math.isfinite(v) else float(v)
        return d


def _le(suite, name, value, tol, detail=""):
    return Check(suite, name, float(value), float(tol), bool(value <= tol), detail)


def _ge(suite, name, value, floor, detail=""):
    return Check(suite, name, float(value), float(floor), bool(value >= floor), detail)


def _insufficient(suite, name, n_paths):
    return Check(suite, name, float("nan"), float(MIN_MC_PATHS), False,
                 f"insufficient sample: {n_paths} paths < {MIN_MC_PATHS} needed for a Monte Carlo check")


# ---------------------------------------------------------------------------

def suite_covariance(ctx):
    h, q, grid = ctx["h"], ctx["q"], ctx["grid"]
    out = []
    inner = covariance.build_cov_matrix(grid, h, "inner-product", q)
    prop2 = covariance.build_cov_matrix(grid, h, "prop2-integral", q)
    reduced = covariance.build_cov_matrix(grid, h, "reduced", q)
    scale = np.abs(inner.entries)
    mask = scale > 0
    rel = np.max(np.abs(prop2.entries - inner.entries)[mask] / scale[mask])
    out.append(_le("covariance", "prop2-integral vs inner-product (max rel)", rel, 1e-5))
    rel = np.max(np.abs(reduced.entries - inner.entries)[mask] / scale[mask])
    out.append(_le("covariance", "closed form vs inner-product (max rel)", rel, 1e-5))
    C = inner.entries
    pos = grid.times > 0
    lo = float(np.linalg.eigvalsh(C[np.ix_(pos, pos)]).min())
    out.append(_ge("covariance", "PSD: min eigenvalue / max diagonal", lo / np.max(np.diag(C)), -1e-10))
    diag = np.array([covariance.variance_R(t, h) for t in grid.times])
    rel = np.max(np.abs(np.diag(C) - diag)[diag > 0] / diag[diag > 0])
    out.append(_le("covariance", "diagonal equals t^2h/c^2 (max rel)", rel, 1e-6))
    if h.a == h.b:
        F = covariance.fbm_covariance(grid.times, h.a)
        out.append(_le("covariance", "constant h: fBm covariance (max abs)", np.max(np.abs(C - F)), 1e-6))
    return out


def suite_moments(ctx):
    h, q, T = ctx["h"], ctx["q"], ctx["T"]
    out = []
    pairs = [(0.1 * T, 0.3 * T), (0.4 * T, 0.45 * T), (0.7 * T, T)]
    if h.a == h.b:
        lam = h.a
        err = max(abs(covariance.increment_second_moment(s, t, h, q)
                      - c_lambda_inv_sq(lam) * (t - s) ** (2 * lam)) / (c_lambda_inv_sq(lam) * (t - s) ** (2 * lam))
                  for s, t in pairs)
        out.append(_le("moments", "constant h: increment law c^-2 |t-s|^2h (max rel)", err, 1e-6))
    worst = max(covariance.increment_second_moment(s, t, h, q) / covariance.increment_upper_bound(s, t, h, T)
                for s, t in pairs)
    out.append(_le("moments", "increment moment / upper bound (max)", worst, 1.0))
    ts = np.linspace(0.1, 0.9, 5) * T
    val, floor = analysis.increment_lower_margin(h, ts, (1e-3, 1e-4), q)
    out.append(_ge("moments", "uniform lower bound: min eps^-2h E|dB|^2 vs half min c^-2", val, floor))
    if h.differentiable:
        tv = []
        for n in (2 ** 9, 2 ** 10):
            u = np.linspace(0.01, 1.0, n) * T
            R = np.array([covariance.variance_R(t, h) for t in u])
            tv.append(np.sum(np.abs(np.diff(R))))
        out.append(_le("moments", "variation of R: relative change 2^9 -> 2^10 points",
                       abs(tv[1] - tv[0]) / tv[1], 0.01))
    n_paths = ctx["n_paths"]
    name = "Cholesky sample variance within 3 SE (fraction of grid points)"
    if n_paths < MIN_MC_PATHS:
        out.append(_insufficient("moments", name, n_paths))
    else:
        grid = ctx["grid"]
        ens = sample_cholesky(grid, h, n_paths, ctx["seed"], "reduced", q)
        idx = grid.times > 0
        exact = np.array([covariance.variance_R(t, h) for t in grid.times[idx]])
        sv = ens.paths[:, idx].var(axis=0, ddof=1)
        se = exact * math.sqrt(2.0 / (n_paths - 1))
        frac = float(np.mean(np.abs(sv - exact) <= 3 * se))
        out.append(_ge("moments", name, frac, 0.95))
    return out


def suite_lass(ctx):
    h, q, T = ctx["h"], ctx["q"], ctx["T"]
    t0 = 0.5 * T
    gaps = []
    for eps in (1e-1, 1e-2, 1e-3):
        eps = eps * T
        r, lim = analysis.lass_covariance_limit(t0, eps, 1.0, 0.5, h, q)
        gaps.append(abs(r - lim) / lim)
    if h.a == h.b:
        return [_le("lass", "constant h: rescaled covariance equals limit (max rel)", max(gaps), 1e-6)]
    dec = all(b < a for a, b in zip(gaps, gaps[1:]))
    return [Check("lass", "gap to fBm limit decreases over eps = 1e-1, 1e-2, 1e-3",
                  gaps[-1], gaps[0], dec, f"relative gaps {gaps}")]


def suite_holder(ctx):
    h, q, T = ctx["h"], ctx["q"], ctx["T"]
    t0 = 0.5 * T
    rep = analysis.holder_exponent(t0, h, None, q)
    tol = 1e-3 if h.a == h.b else 0.05
    out = [_le("holder", f"|estimate - h(t0)| at t0 = {t0:g}", abs(rep.estimate - h(t0)), tol)]
    eps = analysis.default_eps_range(h)
    shifted = analysis.holder_exponent(t0, h, 2 * eps, q)
    out.append(_le("holder", "estimate shift under eps -> 2 eps", abs(shifted.estimate - rep.estimate), 0.02))
    return out


def suite_berman(ctx):
    h, q, T = ctx["h"], ctx["q"], ctx["T"]
    v1, v2, rel = analysis.berman_refinement(h, T, 256, q)
    out = [_le("berman", "refinement change n = 256 -> 512", rel, 0.01)]
    if h.a == h.b:
        ref = analysis.berman_constant_oracle(h.a, T)
        out.append(_le("berman", "constant h: analytic value (rel)", abs(v1 - ref) / ref, 0.01))
    return out


def suite_lnd(ctx):
    h, T = ctx["h"], ctx["T"]
    q = analysis.LND_QUAD
    out = []
    patterns = [[0.5, 0.6], [0.3, 0.45, 0.5, 0.52], [0.2, 0.4, 0.6, 0.8, 0.85]]
    worst_ratio, worst_gap = 1.0, float("inf")
    for p in patterns:
        ts = [x * T for x in p]
        V = analysis.lnd_ratio(ts, h, q)
        bound = analysis.lnd_whole_past_bound(ts, h, q)
        worst_ratio = min(worst_ratio, V)
        worst_gap = min(worst_gap, V - bound)
    out.append(Check("lnd", "V_m > 0 (min over patterns)", worst_ratio, 0.0, worst_ratio > 0))
    out.append(_ge("lnd", "V_m - whole-past bound (min)", worst_gap, -1e-8))
    margin = analysis.lnd_quadratic_form_margin([x * T for x in (0.5, 0.55, 0.6, 0.65)], h, q)
    out.append(Check("lnd", "quadratic form margin C_m > 0", margin, 0.0, margin > 0))
    a, b = (h.a, h.b) if h.a < h.b else (0.6, 0.9)
    I = analysis.lnd_I_lower_bound(a, b)
    out.append(Check("lnd", f"I(a, b) > 0 at ({a:g}, {b:g})", I, 0.0, I > 0))
    return out


def suite_localtime(ctx):
    h, q = ctx["h"], ctx["q"]
    n = min(ctx["n_paths"], 100)
    grid = ctx["grid"]
    ens = sample_cholesky(grid, h, n, ctx["seed"], "reduced", q)
    T = grid.T
    mass, ind, lin, sin = 0.0, 0.0, 0.0, 0.0
    for path in ens.paths:
        est = analysis.local_time_binned(path, grid, None, grid.times)
        mass = max(mass, np.max(np.abs(est.density @ np.diff(est.x_bins) - grid.times)))
        edges = est.x_bins
        k = int(np.argmax(est.density[-1]))
        g_ind = lambda x, k=k, e=edges: ((x >= e[k]) & (x < e[k + 1])).astype(float)  # noqa: E731
        ind = max(ind, analysis.occupation_identity_residual(path, grid, g_ind, edges))
        dx = est.bin_width
        lin = max(lin, analysis.occupation_identity_residual(path, grid, lambda x: x, edges) / (dx * T))
        sin = max(sin, analysis.occupation_identity_residual(path, grid, np.sin, edges) / (dx * T))
    return [
        _le("localtime", "mass: max |sum L dx - t|", mass, 1e-12),
        _le("localtime", "occupation identity, bin indicator", ind, 1e-12),
        _le("localtime", "occupation identity, g(x) = x (residual / (dx Lip T))", lin, 1.0),
        _le("localtime", "occupation identity, g(x) = sin x (residual / (dx Lip T))", sin, 1.0),
    ]


def suite_tanaka(ctx):
    h, q = ctx["h"], ctx["q"]
    n_paths = ctx["n_paths"]
    lat = ctx.get("tanaka", {})
    a_vals = lat.get("a", [-0.2, 0.0, 0.1])
    eps_vals = lat.get("eps", [1e-2, 1e-3])
    t_vals = lat.get("t", [0.5 * ctx["T"], ctx["T"]])
    out = []
    if not h.differentiable:
        return [Check("tanaka", "expectation identity", float("nan"), float("nan"), False,
                      "Hurst function is not differentiable")]
    if n_paths < MIN_MC_PATHS:
        return [_insufficient("tanaka", "expectation identity within 3 SE", n_paths)]
    for r in tanaka.tanaka_lattice(h, a_vals, eps_vals, t_vals, n_paths, ctx["seed"], q):
        out.append(Check("tanaka", f"expectation identity a={r.a:g} eps={r.eps:g} t={r.t:g} (|z|)",
                         abs(r.z), 3.0, r.passed,
                         f"mc_mean={r.mc_mean:.6g} mc_se={r.mc_se:.3g} deterministic={r.deterministic:.6g}"))
    return out


RUNNERS = {
    "covariance": suite_covariance, "moments": suite_moments, "lass": suite_lass,
    "holder": suite_holder, "berman": suite_berman, "lnd": suite_lnd,
    "localtime": suite_localtime, "tanaka": suite_tanaka,
}


def make_context(h, T, grid_size, n_paths, seed, q=None, tanaka_lattice=None):
    return {"h": h, "T": float(T), "grid": TimeGrid.uniform(T, grid_size - 1),
            "n_paths": int(n_paths), "seed": seed if isinstance(seed, RandomSeed) else RandomSeed(seed),
            "q": q or QuadratureSpec(), "tanaka": tanaka_lattice or {}}


def run_suites(names, ctx):
    """Run the named suites ("all" expands to every suite); returns the report dict."""
    if isinstance(names, str):
        names = [names]
    expanded = []
    for n in names:
        expanded.extend(SUITES if n == "all" else [n])
    unknown = [n for n in expanded if n not in RUNNERS]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {SUITES + ('all',)}")
    checks = []
    for n in expanded:
        checks.extend(RUNNERS[n](ctx))
    return {"suites": expanded, "hurst": ctx["h"].describe(),
            "checks": [c.as_dict() for c in checks], "passed": all(c.passed for c in checks)}
