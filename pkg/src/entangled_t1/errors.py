"""Exception types raised across the package."""


class EntangledT1Error(Exception):
    """Base class for all package errors."""


class DimensionMismatch(EntangledT1Error, ValueError):
    pass


class EdgeNotInGraph(EntangledT1Error, KeyError):
    pass


class DegenerateGraph(EntangledT1Error, ValueError):
    """Raised when ``min(m, n) == 1``; no exponent range exists there."""


class Infeasible(EntangledT1Error, ValueError):
    pass


class InvalidFamily(EntangledT1Error, ValueError):
    pass


class ZeroDenominator(EntangledT1Error, ZeroDivisionError):
    pass


class IrrationalResult(EntangledT1Error, ArithmeticError):
    pass


class MixedBases(EntangledT1Error, ArithmeticError):
    pass


class ParseError(EntangledT1Error, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DuplicateCell(ParseError):
    pass
