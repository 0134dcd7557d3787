class NonTerminationError(RuntimeError):
    """A search exceeded its guard; the machine may have an infinite decomposition.

    Run ``xduce check`` on the machine for a diagnosis.
    """


class DeadEnd(RuntimeError):
    """Backtracking could not recover mass for an observed target symbol."""


class UsageError(ValueError):
    pass
