"""Exception hierarchy shared by all heunlab modules."""


class HeunLabError(Exception):
    """Base class for every error raised by heunlab."""


class DomainError(HeunLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class PrecisionError(HeunLabError):
    """The requested accuracy cannot be reached at the configured precision."""


class NumericError(HeunLabError, ArithmeticError):
    """An iteration or adaptive scheme failed to converge."""


class PoleProximityError(DomainError):
    """Evaluation point is closer to a pole than the configured clearance.

    Attributes
    ----------
    nearest : complex
        The lattice point (or other singular point) that triggered the error.
    """

    def __init__(self, message, nearest):
        super().__init__(message)
        self.nearest = nearest


class DegeneracyError(HeunLabError):
    """The data fall on a degenerate branch that is detected but not constructed."""


class DegenerateEnergyError(DegeneracyError):
    """The normalisation of the spectral data breaks down at this eigenvalue."""


class InconsistencyError(HeunLabError):
    """A quantity that must be constant (or must satisfy an identity) does not."""


class PathError(HeunLabError):
    """A safe integration path could not be constructed."""


class ContinuityError(HeunLabError):
    """Branch continuation jumped between adjacent grid points."""


class IntegrationError(NumericError):
    """ODE integration failed (step-size collapse).

    Attributes
    ----------
    location : complex
        Point on the path where the integrator gave up.
    """

    def __init__(self, message, location):
        super().__init__(message)
        self.location = location
