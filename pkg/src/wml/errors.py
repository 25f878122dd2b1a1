"""Exception hierarchy shared by all modules."""


class WMLError(Exception):
    """Base class for every error raised by the package."""


class FamilyError(WMLError, ValueError):
    pass


class ParseError(FamilyError):
    pass


class ConstantPolynomial(FamilyError):
    pass


class DuplicatePolynomial(FamilyError):
    pass


class EmptyFamily(FamilyError):
    pass


class KOutOfRange(WMLError, ValueError):
    pass


class NuOutOfRange(WMLError, ValueError):
    pass


class DimensionMismatch(WMLError, ValueError):
    pass


class WeightTableTooShort(WMLError, ValueError):
    pass


class PhasePrecisionLoss(WMLError, ArithmeticError):
    """The requested engine cannot certify its error bound for this input."""


class BudgetExhausted(WMLError, RuntimeError):
    """Raised in strict mode; carries the best-so-far estimate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EmptySequence(WMLError, ValueError):
    pass


class BoxBudgetExceeded(WMLError, ValueError):
    pass


class DegenerateLadder(WMLError, ValueError):
    pass


class RhoExceedsB(WMLError, ValueError):
    pass


class ConfigInvalid(WMLError, ValueError):
    pass


class BoundViolated(WMLError, AssertionError):
    """An empirical estimate exceeded the bound it was checked against."""


class ValidityWarning(UserWarning):
    """A parameter lies outside the range where a bound is claimed."""
