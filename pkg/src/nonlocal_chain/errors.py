"""Exception hierarchy.

Input problems derive from ``InputError`` (a ``ValueError``); numerical
failures derive from ``NumericalError``. The CLI maps the two families to
exit codes 1 and 2.
"""


class ChainError(Exception):
    """Base class for all package errors."""


class InputError(ChainError, ValueError):
    pass


class AdmissibilityError(InputError):
    """Characteristic function is not positive on (0, 4]."""


class TranslationalInvarianceViolation(AdmissibilityError):
    """A term of order m = 0 was supplied."""


class NumericalError(ChainError, ArithmeticError):
    pass


class StabilityError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class SynthesisError(NumericalError):
    pass
