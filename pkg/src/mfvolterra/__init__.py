"""Numerical laboratory for the Volterra-type multifractional Gaussian process
B_h(t) = int_0^t K_{h(t)}(t, u) W(du)."""

from .errors import (ConfigError, DivergenceAlert, DomainError, FactorizationError, MFVolterraError,
                     RangeError, RegressionError, ToleranceNotMetError)
from .hurst import (DEFAULT_QUAD, HurstFunction, QuadratureSpec, TimeGrid, affine_clamped, constant,
                    sinusoidal, table_interpolated)
from .specfun import beta_fn, c_lambda_inv_sq, c_lambda_sq, gamma_fn
from .kernel import eval_dKH_dH, eval_KH, eval_Kh, phi_bound, total_variation_K
from .covariance import (CovarianceMatrix, build_cov_matrix, increment_second_moment, variance_R,
                         variance_R_prime)
from .simulate import PathEnsemble, RandomSeed, empirical_cov, sample_cholesky, sample_volterra

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DivergenceAlert", "DomainError", "FactorizationError", "MFVolterraError",
    "RangeError", "RegressionError", "ToleranceNotMetError",
    "DEFAULT_QUAD", "HurstFunction", "QuadratureSpec", "TimeGrid", "affine_clamped", "constant",
    "sinusoidal", "table_interpolated",
    "beta_fn", "c_lambda_inv_sq", "c_lambda_sq", "gamma_fn",
    "eval_KH", "eval_Kh", "eval_dKH_dH", "phi_bound", "total_variation_K",
    "CovarianceMatrix", "build_cov_matrix", "increment_second_moment", "variance_R",
    "variance_R_prime",
    "PathEnsemble", "RandomSeed", "empirical_cov", "sample_cholesky", "sample_volterra",
]
