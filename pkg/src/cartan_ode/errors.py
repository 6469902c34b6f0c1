"""Exception hierarchy shared by all modules."""


class CartanOdeError(Exception):
    """Base class for errors raised by this package."""


class ParseError(CartanOdeError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.message = message
        self.offset = offset


class EvaluationError(CartanOdeError, ArithmeticError):
    pass


class UnboundGeneratorError(EvaluationError):
    pass


class PoleError(EvaluationError, ZeroDivisionError):
    pass


class InvalidRadicandError(EvaluationError):
    pass


class ZeroDenominatorError(CartanOdeError, ZeroDivisionError):
    """Division by an identically vanishing expression."""


class SamplingError(CartanOdeError):
    """No admissible sample point was found for a probabilistic test."""


class ChartMismatchError(CartanOdeError, ValueError):
    pass


class DegenerateError(CartanOdeError, ValueError):
    """An input violates a nondegeneracy precondition."""


class EliminationNotSupported(CartanOdeError, NotImplementedError):
    pass


class NotASolutionError(CartanOdeError, ValueError):
    pass


class PatternViolation(CartanOdeError, AssertionError):
    """A computed object does not have the expected algebraic shape."""

    def __init__(self, message: str, entry=None):
        super().__init__(message)
        self.entry = entry


class PreconditionError(CartanOdeError, ValueError):
    pass
