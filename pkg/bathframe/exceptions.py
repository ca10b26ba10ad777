from matcore.exceptions import RefocusError


class SamplingError(RefocusError):
    """Raised for too few samples, a non-uniform grid or a cutoff beyond the Nyquist limit."""
