"""Exception types shared across the package."""


class OdkirchError(Exception):
    """Base class for all package-specific errors."""


class DomainError(OdkirchError, ValueError):
    """An argument lies outside the mathematical domain of an operation.

    Raised for non-integrable norm exponents, evaluation points outside a
    geometry, invalid Hessian orders and similar misuse.
    """


class QuadratureError(OdkirchError, ArithmeticError):
    """An integral or maximization did not converge to the requested tolerance."""


class KernelSyntaxError(OdkirchError, ValueError):
    """A kernel expression failed to parse.

    Carries the character offset of the failure and a short description of
    what was expected there.
    """

    def __init__(self, message: str, offset: int, expected: str):
        super().__init__(f"{message} at offset {offset} (expected {expected})")
        self.offset = offset
        self.expected = expected


class KernelEvalError(OdkirchError, ArithmeticError):
    """A kernel expression produced a non-finite or invalid value.

    Carries the subexpression that faulted and the point at which it was
    evaluated, so a caller can report where a coefficient stopped making sense.
    """

    def __init__(self, message: str, subexpr: str, point):
        super().__init__(f"{message} in '{subexpr}' at (s, t) = {point}")
        self.subexpr = subexpr
        self.point = point


class ConfigError(OdkirchError, ValueError):
    """A run configuration is malformed or violates an invariant."""
