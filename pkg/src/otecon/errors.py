"""Exception types shared across the library.

Solvers distinguish bad inputs (:class:`DomainError` and subclasses) from
runtime failures of the algorithm itself (stalls, resource limits,
overflow guards).  Plain non-convergence within an iteration budget is not
an exception: solvers report it through a ``converged`` flag instead.
"""


class OteconError(Exception):
    """Base class for all library-specific errors."""


class DomainError(OteconError, ValueError):
    """An input violates a documented precondition."""


class InfeasibleError(DomainError):
    """Marginals are incompatible (total masses differ beyond tolerance)."""


class NotPSDError(DomainError):
    """A matrix required to be positive semidefinite is not."""


class NotInvertibleError(DomainError):
    """A matrix required to be invertible is numerically singular."""


class NonAssignmentError(OteconError):
    """A transport plan expected to be a permutation matrix is not."""


class ResourceError(OteconError):
    """A requested computation exceeds a hard size limit."""


class SolverStallError(OteconError):
    """An iterative solver made no progress before its iteration cap."""


class NonIdentificationError(OteconError):
    """An estimation problem has no parameter value fitting the data."""


class StepSizeError(OteconError):
    """Backtracking line search failed to find an acceptable step."""


class ExpOverflowError(OteconError):
    """An exponent exceeded the overflow guard before exponentiation."""
