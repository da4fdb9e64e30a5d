"""Exception hierarchy shared by every module of the package."""


class QSpaceError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QSpaceError, ValueError):
    pass


class PoleAtZero(QSpaceError, ZeroDivisionError):
    """Evaluation hit a negative power of something that is zero (q or a coordinate)."""


class NotInvertible(QSpaceError, ArithmeticError):
    pass


class NotInvertibleImage(NotInvertible):
    """A generator raised to a negative power is mapped to a non-monomial image."""


class NotAHomomorphism(QSpaceError, ValueError):
    """Strict-mode field does not preserve the commutation relations."""


class ParseError(QSpaceError, ValueError):
    """Rejected input text. Carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class UnknownGenerator(ParseError):
    pass


class MissingField(ParseError):
    pass


class BadQValue(ParseError):
    pass


class NumericalError(QSpaceError, ArithmeticError):
    pass


class PoleEncountered(NumericalError):
    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t={time!r}")


class NonFiniteState(NumericalError):
    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t={time!r}")


class SingularJacobian(NumericalError):
    pass


class NotAnEquilibrium(QSpaceError, ValueError):
    pass


class ReferenceDiverged(NumericalError):
    pass
