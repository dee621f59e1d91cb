"""Exception hierarchy shared by every pepbcd module."""


class PepBcdError(Exception):
    """Base class for all errors raised by pepbcd."""


class StructuralError(PepBcdError, ValueError):
    """Expressions, triplets or numeric data do not share a consistent block layout."""


class ConstructionError(PepBcdError, ValueError):
    """A method, setting or experiment description is invalid."""


class InterpolationError(PepBcdError):
    """The two-point interpolant cannot be built from the given pair."""


class DomainError(PepBcdError, ValueError):
    """A closed-form bound was evaluated outside its hypotheses."""


class ExtractionError(PepBcdError):
    """A solver result cannot be turned into explicit worst-case data."""


class ReplayError(PepBcdError):
    """A numeric run left the set of reconstructed points."""


class SolverFailure(PepBcdError):
    """A solve needed by a study did not finish with an optimal status."""

    def __init__(self, message: str, status: str = "failed"):
        super().__init__(message)
        self.status = status


class CapExceededError(PepBcdError):
    """Enumerating every block sequence would exceed the configured cap."""
