"""Exception hierarchy shared by every module."""


class NonlocError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(NonlocError, ValueError):
    """A basis label or index lies outside its declared range."""


class DegenerateInputError(NonlocError, ValueError):
    """Input carries no information (all-zero coefficients, empty set)."""


class ShapeError(NonlocError, ValueError):
    """Dimensions of the operands do not agree."""


class ParameterError(NonlocError, ValueError):
    """A construction or search parameter is outside its stated domain."""


class PreconditionError(NonlocError, ValueError):
    """A numerical precondition (unit norm, orthogonality) is violated."""


class NotOrthogonalError(PreconditionError):
    """The state set is not orthonormal; carries the worst Gram entry."""

    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(
            f"states {i} and {j} are not orthogonal: <psi_{i}|psi_{j}> = {value:.3e}"
        )


class SupportError(NonlocError, ValueError):
    """A state is not supported on the frame it is being restricted to."""

    def __init__(self, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"state leaves the frame: residual {residual:.3e} > {tolerance:.1e}"
        )
