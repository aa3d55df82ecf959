"""Exception types raised by grushin_lab."""


class GrushinError(Exception):
    """Base class for all package errors."""


class DomainError(GrushinError, ValueError):
    """Input lies outside the domain where an operation is defined."""


class BasePointOutsideSpace(DomainError):
    pass


class SingularLocus(DomainError):
    """Requested a Riemannian quantity on (or too close to) the y-axis."""


class BadDimension(DomainError):
    pass


class NoMeeting(DomainError):
    pass


class NumericalFailure(GrushinError, RuntimeError):
    """An iterative method did not produce an answer."""


class CutLocusPoint(NumericalFailure):
    """Target lies on the cut locus: no preimage in the open injectivity domain.

    ``candidates`` holds the covectors on the closed boundary |v| = pi that
    reach the target.
    """

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class NotInImage(NumericalFailure):
    pass


class Unreachable(NumericalFailure):
    pass
