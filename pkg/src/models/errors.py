"""
Exception hierarchy.

Two families: InputError for precondition violations (the CLI exits with
code 2) and NumericalError for numerical failures (exit code 3). Every
module raises a subclass of one of them.
"""


class CorankError(Exception):
    """Base exception for all rank-test errors."""
    pass


class InputError(CorankError, ValueError):
    """Invalid arguments or data."""
    pass


class NumericalError(CorankError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""
    pass


class GridError(InputError):
    """Invalid grid construction request."""
    pass


class TransportError(InputError):
    """Invalid sample/grid pairing request."""
    pass


class ScoreError(InputError):
    """Invalid score function or special-function argument."""
    pass


class StatisticError(InputError):
    """Invalid arguments to a test statistic."""
    pass


class NullDistributionError(InputError):
    """Invalid null-table request."""
    pass


class KonijnError(InputError):
    """Invalid Konijn family configuration."""
    pass


class EfficiencyError(InputError):
    """Invalid efficiency or local-power request."""
    pass


class DegenerateDataError(NumericalError):
    """Sample covariance is singular."""
    pass


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""
    pass


class BracketingError(NumericalError):
    """Root bracketing failed."""
    pass
