"""Exception hierarchy.

Validation problems (bad parameters) derive from ``ValidationError`` and map to
CLI exit code 2; numerical failures derive from ``NumericalError`` and map to
exit code 3.
"""


class GenSqueezeError(Exception):
    """Base class for all package errors."""


class ValidationError(GenSqueezeError, ValueError):
    """Invalid input parameters or inconsistent arguments."""


class NumericalError(GenSqueezeError, RuntimeError):
    """A computation could not be carried out to the required accuracy."""


class EigensolverError(NumericalError):
    pass


class TailError(NumericalError):
    """Fock-space truncation of a phase-space evaluation would leak into the grid."""

    def __init__(self, message, leaked_probability):
        super().__init__(message)
        self.leaked_probability = leaked_probability


class NoReturnError(NumericalError):
    """No return of the vacuum probability inside the sampled range."""


class FitError(NumericalError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DivergenceError(NumericalError):
    """Classical trajectory evaluated at or beyond its blow-up time."""

    def __init__(self, message, t_star):
        super().__init__(message)
        self.t_star = t_star
