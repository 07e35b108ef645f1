"""Exception hierarchy shared by every module of the package."""


class GaveError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(GaveError, ValueError):
    pass


class SingularMatrix(GaveError, ArithmeticError):
    pass


class ZeroDiagonal(SingularMatrix):
    pass


class NonFiniteValue(GaveError, ValueError):
    pass


class NonFiniteIterate(GaveError, ArithmeticError):
    pass


class NegativeTheta(GaveError, ValueError):
    pass


class ZeroRightHandSide(GaveError, ValueError):
    """Raised when ``||c|| = 0``; ``absolute`` carries the unscaled residual."""

    def __init__(self, absolute):
        super().__init__("right-hand side has zero norm; relative residual undefined")
        self.absolute = absolute


class NoConvergence(GaveError, RuntimeError):
    """An iterative estimator did not stabilize.

    ``estimate`` holds the best value reached and ``quantity`` names what was
    being estimated (for example ``"gamma"`` when raised from the scalar bounds).
    """

    def __init__(self, message, estimate=None, quantity=None):
        super().__init__(message)
        self.estimate = estimate
        self.quantity = quantity


class TooLarge(GaveError, ValueError):
    pass


class TooSmall(GaveError, ValueError):
    pass


class ParseError(GaveError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column


class MissingPart(GaveError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing part"


class AllDiverged(GaveError, RuntimeError):
    pass
