"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` for bad inputs and
violated preconditions, ``NumericalGuardError`` for computations refused
because their accuracy guarantees could not be met.  The CLI maps them to
exit codes 2 and 3.
"""


class TranslatesError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TranslatesError, ValueError):
    pass


class NumericalGuardError(TranslatesError, ArithmeticError):
    pass


class MalformedIntervalError(ValidationError):
    pass


class DegenerateSpecError(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class WindowExceededError(ValidationError):
    pass


class EmptyAverageError(ValidationError):
    pass


class EmptyRegionError(ValidationError):
    pass


class DegenerateSpectrumError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class UnsupportedOracleError(ValidationError):
    pass


class NonintegrableEnvelopeError(NumericalGuardError):
    """Decay exponent too small for the periodized tail to converge."""


class IndistinguishableZeroError(NumericalGuardError):
    """Zero threshold does not exceed the certified tail of the grid."""


class ResolutionError(NumericalGuardError):
    """Grid too coarse for the oscillation of the integrand."""
