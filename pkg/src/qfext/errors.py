"""Exception types shared across the toolkit."""


class QfextError(Exception):
    pass


class LevelTooLow(QfextError):
    """Ambient level is too small for the element being expanded."""


class NotASubfield(QfextError):
    pass


class InternalInconsistency(QfextError):
    """Two independently computed answers disagree; indicates a bug."""


class BudgetExceeded(QfextError):
    """A size or level cap was hit before the computation finished."""


class MonotonicityViolation(QfextError):
    """A tower presentation violated K_n <= K_{n+1} or a proved monotone law."""


class RecurrenceUndefined(QfextError):
    pass


class UncertifiedInput(QfextError):
    """A derived computation received an input carrying a heuristic flag."""


class UncertifiedStep(QfextError):
    pass


class ParseError(QfextError):
    def __init__(self, msg, pos=None):
        super().__init__(msg if pos is None else f"{msg} (at {pos})")
        self.pos = pos


class UndefinedName(ParseError):
    pass


class NonPPowerDenominator(ParseError):
    pass
