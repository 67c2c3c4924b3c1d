"""Exception types raised across the package."""


class LassoCompatError(Exception):
    """Base class for all errors raised by lassocompat."""


class AdmissibilityError(LassoCompatError, ValueError):
    """A design specification violates one of its family constraints."""


class NotPSDError(LassoCompatError, ValueError):
    """A matrix is not symmetric positive semidefinite."""


class RankError(LassoCompatError, ValueError):
    """Requested number of rows is smaller than the rank of the Gram matrix."""


class NonConvergence(LassoCompatError, RuntimeError):
    """Coordinate descent hit its iteration cap before the KKT tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class DegenerateDiagonal(LassoCompatError, ValueError):
    """Some diagonal entry of the Gram matrix is zero."""


class UnsupportedFamily(LassoCompatError, ValueError):
    """No closed form is available for this design family."""


class SetTooLarge(LassoCompatError, ValueError):
    """Index set is beyond the exact-enumeration limit."""


class MissingSigma0(LassoCompatError, ValueError):
    """The approximation matrix required by the Sigma_0 bound is absent."""
