"""Exception types raised by spintransfer."""


class SpinTransferError(Exception):
    """Base class for all package errors."""


class InvariantError(SpinTransferError, ValueError):
    """A value violates a physical invariant (Hermiticity, trace, positivity)."""

    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class BlochBallError(InvariantError):
    """Bloch parameters fall outside the unit ball."""


class NonHermitianError(InvariantError):
    pass


class SpecError(SpinTransferError, ValueError):
    """Invalid model or run parameter. ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericalError(SpinTransferError, ArithmeticError):
    pass
