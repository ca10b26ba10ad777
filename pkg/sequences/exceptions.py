from matcore.exceptions import RefocusError


class SequenceParseError(RefocusError):
    def __init__(self, message, position=0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class AmbiguousOrderError(RefocusError):
    """A residual under the nonzero threshold that its step-doubling error cannot resolve."""

    def __init__(self, order, cluster, residual):
        super().__init__(
            f"ambiguous residual {residual:.3g} at order {order} on cluster {cluster}"
        )
        self.order = order
        self.cluster = cluster
        self.residual = residual


class SearchBudgetError(RefocusError):
    def __init__(self, count, budget):
        super().__init__(f"{count} candidate sequences exceed the search budget of {budget}")
        self.count = count
        self.budget = budget


class MissingPulseError(RefocusError):
    """Raised when a schedule or experiment lacks a required pulse shape."""
