"""Exception types shared across the package.

The CLI maps these onto exit codes: :class:`ValidationError` subclasses are
input problems (exit 1), :class:`NumericalError` subclasses are
non-convergence (exit 2).
"""


class FlatconeError(Exception):
    """Base class for all package errors."""


class ValidationError(FlatconeError, ValueError):
    """Input data violates a documented precondition or invariant."""


class DivisorError(ValidationError):
    pass


class PoleError(ValidationError):
    """Evaluation requested at a cone point, where the value is a pole or zero."""


class ClearanceError(ValidationError):
    """A path segment passes closer to a cone point than its clearance allows."""


class DivergenceError(ValidationError):
    """An improper integral to a cone point with alpha <= 0 does not converge."""


class ResonanceObstruction(ValidationError):
    """h(s+m) = 0 with R_m != 0: the recursion has no power-series solution."""

    def __init__(self, m: int, remainder: complex):
        self.m = m
        self.remainder = remainder
        super().__init__(
            f"resonance at n={m}: h(s+{m}) = 0 but R_{m} = {remainder!r} != 0"
        )


class NumericalError(FlatconeError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class QuadratureError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass
