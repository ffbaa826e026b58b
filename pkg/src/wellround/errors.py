"""Exception hierarchy shared by all wellround modules."""


class WellRoundError(Exception):
    """Base class for every error raised by this package."""


class SingularBasis(WellRoundError, ValueError):
    pass


class DimensionMismatch(WellRoundError, ValueError):
    pass


class EnumerationBudgetExceeded(WellRoundError, RuntimeError):
    pass


class NotWellRounded(WellRoundError, ValueError):
    pass


class NotGenericWR(WellRoundError, ValueError):
    pass


class RankDeficient(WellRoundError, ValueError):
    pass


class IndexOutOfRange(WellRoundError, IndexError):
    pass


class NumericallySingularMinor(WellRoundError, ArithmeticError):
    """All candidate minors fell below the float threshold.

    Usually means an ill-conditioned flag; pass rational entries instead.
    """


class NotSquarefree(WellRoundError, ValueError):
    pass


class BudgetExhausted(WellRoundError, RuntimeError):
    """The orbit search ran out of evaluations before reaching its tolerance.

    The best result found so far is attached as ``result``.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class NotACover(WellRoundError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnboundedElement(WellRoundError, ValueError):
    pass


class HypothesisViolated(WellRoundError, ValueError):
    pass


class WindowTooSmall(WellRoundError, ValueError):
    pass


class DeclarationFalse(WellRoundError, ValueError):
    pass
