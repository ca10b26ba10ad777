from matcore.exceptions import RefocusError


class UnknownShapeError(RefocusError):
    """Raised for a shape name that is neither builtin nor a pulse file."""


class PulseDomainError(RefocusError):
    """Raised for evaluation times outside [0, tau] or malformed pulse data."""
