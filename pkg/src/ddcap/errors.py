"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 1 for validation and
contract violations, 2 for numerical failures, 3 for resource limits.
"""


class DDCapError(Exception):
    exit_code = 2


class ValidationError(DDCapError, ValueError):
    """Invalid parameters, configuration or precondition."""

    exit_code = 1


class ContractError(ValidationError):
    """A caller violated an operation's contract (e.g. f(0) != 0)."""


class RangeError(ValidationError):
    """Evaluation outside the domain covered by tabulated data."""


class DomainError(ValidationError):
    """A scalar function was evaluated outside its domain."""


class NumericError(DDCapError, ArithmeticError):
    exit_code = 2


class InfeasibleError(NumericError):
    """No water level realizes the requested power."""


class ResolutionError(NumericError):
    """A grid is too coarse for the requested computation."""


class ResourceError(DDCapError):
    exit_code = 3
