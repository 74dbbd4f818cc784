class BetaCodingError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(BetaCodingError, ValueError):
    pass


class ZeroPolynomial(BetaCodingError, ValueError):
    pass


class NotHyperbolic(BetaCodingError):
    pass


class NotIrreducible(BetaCodingError):
    pass


class NotPisot(BetaCodingError):
    pass


class DegreeTooLarge(BetaCodingError, ValueError):
    pass


class PrecisionExhausted(BetaCodingError, ArithmeticError):
    pass


class DivergentDirection(BetaCodingError, ValueError):
    """A digit tail runs towards the side where the place does not contract."""


class HenselFailure(BetaCodingError, ArithmeticError):
    """The local factor is not simple modulo p, so no root can be lifted."""


class PeriodCapExceeded(BetaCodingError):
    pass


class AlphabetViolation(BetaCodingError, ValueError):
    pass


class NonTerminating(BetaCodingError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SearchCapExceeded(BetaCodingError):
    pass


class GapConditionUnmet(BetaCodingError, ValueError):
    pass


class NonFiniteReduction(BetaCodingError, ValueError):
    """Digit reduction would need infinitely many nonzero coefficients."""


class ReductionFailure(BetaCodingError, ArithmeticError):
    pass
