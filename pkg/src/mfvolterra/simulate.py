"""Sample paths of B_h: exact Gaussian factorization and Volterra discretization.

Randomness is counter based: path ``k`` of seed ``root`` always draws from the
Philox stream keyed by (root, k), so ensembles do not depend on how paths are
split across workers.  Paths are generated in fixed chunks; the worker count
only decides how many chunks run at once.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .covariance import CovarianceMatrix, build_cov_matrix
from .errors import DomainError, FactorizationError
from .hurst import DEFAULT_QUAD, TimeGrid

CHUNK = 256
JITTER_START = 1e-14
JITTER_MAX = 1e-8


def worker_count(threads=None):
    """Explicit argument, else MFVOLTERRA_THREADS, else 1."""
    if threads is None:
        env = os.environ.get("MFVOLTERRA_THREADS", "").strip()
        threads = int(env) if env else 1
    threads = int(threads)
    if threads < 1:
        raise DomainError(f"thread count must be >= 1, got {threads}")
    return threads


@dataclass(frozen=True)
class RandomSeed:
    root: int

    def __post_init__(self):
        root = int(self.root)
        if not 0 <= root < 2 ** 64:
            raise DomainError("seed root must be a 64-bit unsigned integer")
        object.__setattr__(self, "root", root)

    def generator(self, path_index):
        """Independent stream for one path: Philox keyed by (root, path_index)."""
        return np.random.Generator(np.random.Philox(key=self.root + (int(path_index) << 64)))

    def normals(self, start, stop, n):
        """(stop - start) x n standard normals, row k from path start + k."""
        out = np.empty((stop - start, n))
        for k in range(start, stop):
            out[k - start] = self.generator(k).standard_normal(n)
        return out


@dataclass
class PathEnsemble:
    grid: TimeGrid
    paths: np.ndarray = field(repr=False)
    method: str
    seed: RandomSeed
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.paths, dtype=float)
        if p.ndim != 2 or p.shape[1] != len(self.grid):
            raise DomainError("paths must be n_paths x len(grid)")
        if not np.all(np.isfinite(p)):
            raise DomainError("ensemble contains non-finite values")
        if np.any(p[:, 0] != 0.0):
            raise DomainError("paths must start at exactly 0")
        self.paths = p

    @property
    def n_paths(self):
        return self.paths.shape[0]


def _apply(seed, n_paths, factor, threads, first_path=0):
    """Rows xi_k @ factor for first_path <= k < first_path + n_paths."""
    n = factor.shape[0]
    end = first_path + n_paths
    # chunk boundaries are multiples of CHUNK, independent of the request
    starts = [first_path] + list(range((first_path // CHUNK + 1) * CHUNK, end, CHUNK))

    def run(start):
        stop = min((start // CHUNK + 1) * CHUNK, end)
        return seed.normals(start, stop, n) @ factor

    workers = worker_count(threads)
    if workers == 1 or len(starts) == 1:
        blocks = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, starts))
    return np.vstack(blocks)


def cholesky_with_jitter(C):
    """Lower Cholesky factor, adding jitter 1e-14 .. 1e-8 x max diagonal if needed.

    Returns (L, jitter) where jitter is the relative amount finally used.
    """
    C = np.asarray(C, dtype=float)
    scale = float(np.max(np.diag(C))) if C.size else 0.0
    if scale <= 0.0:
        raise FactorizationError("covariance has no positive diagonal entry")
    jitter = 0.0
    while True:
        try:
            L = linalg.cholesky(C + jitter * scale * np.eye(C.shape[0]), lower=True)
            return L, jitter
        except linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX * (1 + 1e-9):
                raise FactorizationError(
                    f"covariance not positive definite even with jitter {JITTER_MAX:g} x max diagonal")


def sample_cholesky(grid, h, n_paths, seed, method="inner-product", q=DEFAULT_QUAD,
                    cov=None, threads=None, first_path=0):
    """Exact draws of (B_h(t_0), ..., B_h(t_n)).

    ``cov`` may pass a precomputed CovarianceMatrix for the same grid; otherwise
    it is built with ``method``.  Paths first_path, ..., first_path + n_paths - 1
    of the seed's stream are returned, so an ensemble can be produced in pieces.
    """
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    if len(grid) < 2:
        raise DomainError("grid needs at least two points")
    if cov is None:
        cov = build_cov_matrix(grid, h, method, q)
    elif cov.grid != grid:
        raise DomainError("covariance matrix belongs to a different grid")
    pos = grid.times > 0
    L, jitter = cholesky_with_jitter(cov.entries[np.ix_(pos, pos)])
    paths = np.zeros((n_paths, len(grid)))
    paths[:, pos] = _apply(seed, n_paths, L.T, threads, first_path)
    return PathEnsemble(grid, paths, "cholesky", seed,
                        {"covariance": cov.method, "jitter": jitter, "hurst": h.describe()})


def cumulative_kernel(t, c, H):
    """int_0^c K_H(t, u) du for 0 <= c <= t (vectorized in c).

    With r = c/t, p = 3/2 - H, q = H - 1/2:
    t^(H+1/2) [B(p, q) I_r(p, q) + r^(H+1/2) J(r)] / (H + 1/2),
    J(r) = int_r^1 x^(-2H) (1 - x)^(H - 3/2) dx.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0) or np.any(c > t * (1 + 1e-14)):
        raise DomainError("cumulative_kernel needs 0 <= c <= t")
    if not 0.5 < H < 1.0:
        raise DomainError(f"Hurst index must lie in (1/2, 1), got {H!r}")
    r = np.clip(c / t, 0.0, 1.0)
    p, q = 1.5 - H, H - 0.5
    a = 1.0 - 2.0 * H
    with np.errstate(divide="ignore", invalid="ignore"):
        # two representations of J, each accurate away from its own singular end
        near_one = (1.0 - r) ** q / q * special.hyp2f1(2.0 * H, q, H + 0.5, 1.0 - r)
        near_zero = special.beta(a, q) - r ** a / a * special.hyp2f1(a, 1.0 - q, a + 1.0, r)
        J = np.where(r >= 0.5, near_one, near_zero)
        tail = np.where(r > 0, r ** (H + 0.5) * J, 0.0)
    out = t ** (H + 0.5) * (special.beta(p, q) * special.betainc(p, q, r) + tail) / (H + 0.5)
    return out[()] if out.ndim == 0 else out


def volterra_weights(grid, h, n_sub):
    """w_ij = (1/sqrt(D)) int_{cell_j and (0, t_i]} K_{h(t_i)}(t_i, u) du, cells of width D = T/n_sub."""
    n_sub = int(n_sub)
    if n_sub < len(grid):
        raise DomainError("n_sub must be at least the number of grid points")
    T = grid.T
    edges = np.linspace(0.0, T, n_sub + 1)
    D = T / n_sub
    W = np.zeros((len(grid), n_sub))
    for i, t in enumerate(grid.times):
        if t == 0.0:
            continue
        A = cumulative_kernel(t, np.minimum(edges, t), h(t))
        W[i] = np.diff(A) / np.sqrt(D)
    return W


def sample_volterra(grid, h, n_sub, n_paths, seed, q=DEFAULT_QUAD, threads=None, first_path=0):
    """B(t_i) ~ sum_j w_ij xi_j with cell-average kernel weights.

    The weights are exact cell integrals (closed form), so ``q`` is accepted
    for interface symmetry only.
    """
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    W = volterra_weights(grid, h, n_sub)
    paths = _apply(seed, n_paths, W.T, threads, first_path)
    paths[:, grid.times == 0.0] = 0.0
    return PathEnsemble(grid, paths, "volterra", seed, {"n_sub": int(n_sub), "hurst": h.describe()})


def empirical_cov(ens):
    """Unbiased sample covariance across paths."""
    if ens.n_paths < 2:
        raise DomainError("empirical covariance needs at least two paths")
    X = ens.paths - ens.paths.mean(axis=0)
    C = X.T @ X / (ens.n_paths - 1)
    C = 0.5 * (C + C.T)
    return CovarianceMatrix(ens.grid, C, f"empirical-{ens.method}", ens.info.get("hurst", {}))


def sample_cov_variance(exact, n_paths):
    """Variance of the unbiased sample covariance of Gaussian data:
    (C_ij^2 + C_ii C_jj) / (n - 1)."""
    exact = np.asarray(exact, dtype=float)
    d = np.diag(exact)
    return (exact ** 2 + np.outer(d, d)) / (n_paths - 1)
