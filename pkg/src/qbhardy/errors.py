"""Exception types raised across the toolkit."""


class QBHardyError(Exception):
    """Base class for all toolkit errors."""


class NonFinite(QBHardyError, ArithmeticError):
    """A function value or integral came out NaN."""


class InvalidGrid(QBHardyError, ValueError):
    pass


class DivergentIntegral(QBHardyError, ArithmeticError):
    """An integral is certified infinite (boundary exponent or hint)."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class MissingDecayHint(QBHardyError, ValueError):
    pass


class ParameterOutOfRange(QBHardyError, ValueError):
    pass


class BetaOutOfRange(ParameterOutOfRange):
    """Raised by routines only valid for -1 < beta <= 0."""


class DegenerateDenominator(QBHardyError, ArithmeticError):
    """The right-hand integral of a class condition is zero or divergent."""

    def __init__(self, message, divergent=False):
        super().__init__(message)
        self.divergent = divergent


class ZeroPsi(QBHardyError, ArithmeticError):
    pass


class NotInClass(QBHardyError, ValueError):
    pass


class NotInHatClass(NotInClass):
    pass


class EmptyGrid(QBHardyError, ValueError):
    pass


class EmptyAdmissibleRange(QBHardyError, ValueError):
    pass


class HypothesisNotCertified(QBHardyError, ValueError):
    pass


class DivergentWI(QBHardyError, ArithmeticError):
    """The weight is not integrable over the unit interval."""


class ConfigInvalid(QBHardyError, ValueError):
    def __init__(self, field, reason):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class ParameterOutOfTheoremRange(QBHardyError, ValueError):
    def __init__(self, theorem, field, reason=""):
        msg = f"{theorem}: parameter {field!r} outside admissible range"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.theorem = theorem
        self.field = field


__all__ = ["QBHardyError", "NonFinite", "InvalidGrid", "DivergentIntegral", "MissingDecayHint",
           "ParameterOutOfRange", "BetaOutOfRange", "DegenerateDenominator", "ZeroPsi", "NotInClass",
           "NotInHatClass", "EmptyGrid", "EmptyAdmissibleRange", "HypothesisNotCertified", "DivergentWI",
           "ConfigInvalid", "ParameterOutOfTheoremRange"]
