"""Exception hierarchy shared by every module."""


class QldpError(Exception):
    """Base class for all library errors."""


class ValidationError(QldpError, ValueError):
    """An object failed one of its invariants.

    ``invariant`` names the violated property (e.g. ``"trace"``) and
    ``residual`` carries the observed deviation.
    """

    def __init__(self, invariant, residual=None, message=None):
        self.invariant = invariant
        self.residual = residual
        if message is None:
            message = f"{invariant} check failed"
            if residual is not None:
                message += f" (residual {residual:.3g})"
        super().__init__(message)


class NonHermitian(ValidationError):
    def __init__(self, residual, message=None):
        super().__init__("hermiticity", residual, message)


class ParseError(QldpError, ValueError):
    """Malformed input file."""


class NoConvergence(QldpError, RuntimeError):
    pass


class SingularInput(QldpError, ValueError):
    pass


class DimensionMismatch(QldpError, ValueError):
    pass


class DimCapExceeded(QldpError, ValueError):
    def __init__(self, required, allowed):
        self.required = required
        self.allowed = allowed
        super().__init__(f"dimension {required} exceeds cap {allowed}")


class AlphaOutOfRange(QldpError, ValueError):
    pass


class QuadratureFailure(QldpError, RuntimeError):
    pass


class RangeViolation(QldpError, ValueError):
    pass
