"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A set function violates the capacity axioms.

    ``masks`` holds the offending subset mask(s), e.g. ``(S, S | 1 << i)``
    for a failed cover pair.
    """

    def __init__(self, message, masks=()):
        super().__init__(message)
        self.masks = tuple(masks)


class DistortionError(ValueError):
    pass


class GroundMismatchError(ValueError):
    pass


class NullConditioningError(ValueError):
    pass


class SizeGuardError(ValueError):
    """Problem size exceeds a configured guard."""

    def __init__(self, message, rows=None, cols=None):
        super().__init__(message)
        self.rows = rows
        self.cols = cols


class NonRepresentableError(CapacityError):
    pass


class SolverError(RuntimeError):
    """The LP backend failed numerically (not infeasible, not unbounded)."""


class InstanceFormatError(ValueError):
    pass
