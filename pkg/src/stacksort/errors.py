class StackSortError(Exception):
    pass


class ResourceBudgetError(StackSortError):
    """A computation would exceed its configured memory or size cap."""


class LevelOrderError(StackSortError):
    """Recurrence levels must be computed strictly in order."""


class InvariantViolation(StackSortError):
    pass


class NullspaceError(StackSortError):
    """Approximant linear system has no, or more than one, solution direction."""

    def __init__(self, msg, dimension):
        super().__init__(msg)
        self.dimension = dimension


class RootFindingError(StackSortError):
    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class EnsembleError(StackSortError):
    pass
