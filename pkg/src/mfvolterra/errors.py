"""Exception hierarchy shared by all modules."""


class MFVolterraError(Exception):
    """Base class for errors raised by this package."""


class DomainError(MFVolterraError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ToleranceNotMetError(MFVolterraError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget."""


class FactorizationError(MFVolterraError, ArithmeticError):
    """A covariance matrix could not be factorized within the jitter policy."""


class RangeError(MFVolterraError, ValueError):
    """A path value fell outside the spatial bins of a local-time estimator."""


class RegressionError(MFVolterraError, ArithmeticError):
    """A log-log regression had too few distinct abscissae."""


class DivergenceAlert(MFVolterraError, ArithmeticError):
    """Successive refinements of an integral grew beyond the allowed ratio."""


class ConfigError(MFVolterraError, ValueError):
    """Invalid campaign configuration."""
