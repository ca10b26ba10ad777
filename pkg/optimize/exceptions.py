from matcore.exceptions import RefocusError


class EliminationError(RefocusError):
    """Raised when the end-point conditions cannot be solved for the dependent coefficients."""


class InfeasibleGoalError(RefocusError):
    """Raised for a design goal with too few harmonics, or a calibration without a root."""
