"""Exception hierarchy shared by all spectrakit modules."""

from __future__ import annotations


class SpectraError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(SpectraError, ValueError):
    """A point or shift lies outside the domain of a descriptor."""


class EvalError(SpectraError):
    """A nested quadrature needed for evaluation failed to converge."""


class PrecondError(SpectraError, ValueError):
    """An operation was called outside its admissible parameter range."""


class QuadFail(SpectraError):
    """A quadrature could not reach its error target within the horizon cap."""


class UnboundedError(SpectraError, ValueError):
    """An operation that needs a bounded function received an unbounded one."""


class SingularMatrix(SpectraError, ValueError):
    """A resolvent was requested too close to an eigenvalue."""


class NotDiagonalizable(SpectraError, ValueError):
    """A generator matrix is (numerically) defective."""


class HypothesisUnverified(SpectraError):
    """A tauberian check was requested but its hypothesis does not hold."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class SuiteAssertionError(SpectraError, AssertionError):
    """A verification suite found a violated identity."""

    def __init__(self, message: str, failures=None):
        super().__init__(message)
        self.failures = list(failures or [])
