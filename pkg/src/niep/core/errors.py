"""
Exception hierarchy for niep.

Three families map onto the process exit codes of the CLI:
input and condition errors (1), construction errors (2) and numerical
errors (1, they signal a defect rather than a property of the spectrum).
"""

from typing import Any, Optional


class NiepError(Exception):
    """Base class for every niep error."""

    exit_code: int = 1


# ===== Input errors =====


class InputError(NiepError):
    """The request itself is malformed."""


class ParseError(InputError):
    """A spectrum or matrix token could not be parsed."""

    def __init__(self, position: int, token: str, reason: str = "unrecognised token"):
        self.position = position
        self.token = token
        self.reason = reason
        super().__init__(f"{reason} {token!r} at position {position}")


class ConjugateClosureError(InputError):
    """A complex value is missing its conjugate."""

    def __init__(self, value: Any):
        self.value = value
        super().__init__(f"{value} has no matching conjugate in the spectrum")


class ModeError(InputError):
    """An exact-only operation was asked for float data (or the reverse)."""


class WrongShape(InputError):
    """The spectrum does not have the shape a strategy requires."""


class ParameterError(InputError):
    """A parameter override key or value is invalid."""


class UnknownStrategy(InputError):
    """The requested strategy name does not exist."""


# ===== Necessary-condition failures =====


class ConditionFailure(NiepError):
    """The spectrum violates a necessary condition for realizability."""


class NoPerronError(ConditionFailure):
    """No real eigenvalue dominates every modulus."""

    def __init__(self, message: str, witness: Any = None):
        self.witness = witness
        super().__init__(message)


class NecessaryConditionError(ConditionFailure):
    """A power sum is negative (or Perron fails) so no construction is attempted."""


# ===== Construction failures =====


class ConstructionError(NiepError):
    """The construction cannot realize the spectrum with the requested layout."""

    exit_code = 2


class MethodInapplicable(ConstructionError):
    """The constructive method does not apply in this layout."""

    def __init__(self, message: str, stuck_index: Optional[int] = None):
        self.stuck_index = stuck_index
        super().__init__(message)


class InfeasibleAlphas(ConstructionError):
    """An explicit alpha violates its lower bound, or their sum exceeds the Perron value."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class InfeasibleDiagonal(ConstructionError):
    """A prescribed diagonal induces infeasible alphas."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class InfeasibleCut(ConstructionError):
    """No cut index gives the second row enough negative mass."""


class InfeasibleBeta(ConstructionError):
    """A beta entry (or a beta sum) lies outside its feasible interval."""

    def __init__(self, message: str, row: Optional[int] = None, col: Optional[int] = None):
        self.row = row
        self.col = col
        super().__init__(message)


class EmptyInterval(ConstructionError):
    """A feasibility interval for a free parameter is empty."""

    def __init__(
        self,
        message: str,
        parameter: Optional[str] = None,
        lower: Any = None,
        upper: Any = None,
    ):
        self.parameter = parameter
        self.lower = lower
        self.upper = upper
        super().__init__(message)


class ShapeConflict(ConstructionError):
    """A layout's index pattern collides for this spectrum size."""


# ===== Numerical failures =====


class NumericalError(NiepError):
    """An internal numerical procedure failed."""


class ConvergenceFailure(NumericalError):
    """The QR iteration hit its cap."""

    def __init__(self, message: str, iterations: int = 0):
        self.iterations = iterations
        super().__init__(message)


class ImaginaryResidue(NumericalError):
    """A complex-mode similarity left an imaginary part on some entry."""

    def __init__(self, row: int, col: int, value: Any):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"entry ({row},{col}) keeps imaginary part {value}")


def exit_code_for(exc: BaseException) -> int:
    """Process exit code for an exception raised by the pipeline."""
    if isinstance(exc, NiepError):
        return exc.exit_code
    return 1
