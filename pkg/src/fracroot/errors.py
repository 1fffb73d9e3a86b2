"""Exception hierarchy shared by the numeric kernels and the solvers."""


class FracRootError(Exception):
    """Base class for all library errors."""


class PoleError(FracRootError, ArithmeticError):
    """Gamma function evaluated at (or too close to) a non-positive integer."""


class DomainError(FracRootError, ValueError):
    """Argument outside the domain of a power or fractional operator."""


class ExprSyntaxError(FracRootError, ValueError):
    """Malformed expression source.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int = -1):
        self.position = position
        if position >= 0:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ArityError(ExprSyntaxError):
    """Unknown variable or function name, or a variable index outside 1..n."""


class DivByZeroError(FracRootError, ZeroDivisionError):
    def __init__(self, message: str, component: int | None = None):
        self.component = component
        if component is not None:
            message = f"{message} in component {component + 1}"
        super().__init__(message)


class UnsupportedExpr(FracRootError, ValueError):
    """Expression cannot be brought to fractional-power-series form."""


class UnsupportedExponent(FracRootError, ValueError):
    """Caputo derivative requested for an exponent it does not cover."""


class SingularPointError(FracRootError, ValueError):
    """Fractional Jacobian requested at a point with a zero coordinate."""


class SingularMatrixError(FracRootError, ArithmeticError):
    pass


class PreconditionError(FracRootError, ValueError):
    pass


class EmptyGridError(FracRootError, ValueError):
    pass
