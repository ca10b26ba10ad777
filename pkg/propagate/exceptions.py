from matcore.exceptions import RefocusError


class IntegrationError(RefocusError):
    """Raised for invalid integration requests (order, step count)."""


class UnsupportedOrderError(RefocusError):
    """Raised when a cumulant beyond the shipped conversion order is requested."""


class QuadratureError(RefocusError):
    """Raised when a quadrature grid is too coarse or cannot be halved."""
