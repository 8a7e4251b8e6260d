"""Thin wrapper around QUADPACK that enforces a QuadratureSpec."""

import warnings

from scipy import integrate

from .errors import ToleranceNotMetError
from .hurst import DEFAULT_QUAD


def adaptive(f, lo, hi, q=DEFAULT_QUAD, points=None, weight=None, wvar=None, what="integral"):
    """Integrate f over [lo, hi]; raise ToleranceNotMetError on budget exhaustion."""
    if hi == lo:
        return 0.0
    kwargs = dict(epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
                  full_output=1)
    if points is not None:
        pts = [p for p in points if lo < p < hi]
        if pts:
            kwargs["points"] = sorted(set(pts))
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, lo, hi, **kwargs)
    val, err = out[0], out[1]
    if len(out) > 3:
        # a fourth element is QUADPACK's diagnostic message (ier > 0)
        budget = max(q.abs_tol, q.rel_tol * abs(val))
        exhausted = "maximum number of subdivisions" in str(out[3])
        # roundoff is also flagged; only fail when the estimate is poor
        if exhausted or err > 100.0 * budget:
            raise ToleranceNotMetError(
                f"{what} on [{lo:.6g}, {hi:.6g}]: value {val:.6g}, error estimate "
                f"{err:.3g} exceeds tolerance {budget:.3g}")
    return val
