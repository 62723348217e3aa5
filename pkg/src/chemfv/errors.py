"""Exception types shared across the package."""


class ChemFVError(Exception):
    """Base class for all package-specific errors."""


class OutOfRange(ChemFVError):
    """A model parameter violates its admissible range."""

    def __init__(self, field, value, constraint):
        self.field = field
        self.value = value
        self.constraint = constraint
        super().__init__(f"{field} = {value!r} violates {constraint}")


class NonnegativityViolation(ChemFVError):
    """A field that must be nonnegative has a negative entry."""


class ZeroMass(ChemFVError):
    """The initial cell density integrates to zero."""


class PositivityViolation(ChemFVError):
    """A field that must be strictly positive has a nonpositive entry."""


class SingularSignal(ChemFVError):
    """The signal field dropped below the positivity guard; the state is
    numerically untrustworthy."""


class NoConvergence(ChemFVError):
    """The linear solver exhausted its iteration budget."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )


class EmptySeries(ChemFVError):
    """A diagnostics series with no samples was handed to the verdict engine."""


class InsufficientResolution(ChemFVError):
    """Errors in a convergence study did not decrease under refinement."""


class ParseError(ChemFVError):
    """A configuration document could not be parsed."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)


class MissingColumn(ChemFVError):
    """A time-series CSV lacks an expected column."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"missing column: {column}")
