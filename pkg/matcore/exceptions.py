class RefocusError(Exception):
    """Base class for every error raised by the softpulse apps."""


class CapacityError(RefocusError):
    """Raised when a cluster needs more qubits than the configured maximum."""


class NumericalError(RefocusError):
    """Raised when a computation produces non-finite values."""


class RegisterIndexError(RefocusError, IndexError):
    """Raised for a site or bond outside the register."""
