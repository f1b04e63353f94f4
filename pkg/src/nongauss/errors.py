"""Exception types shared across the package."""


class InvalidStateError(ValueError):
    """A state object violates its physicality constraints."""


class TruncationError(RuntimeError):
    """A Fock-space result lost more trace to the cutoff than allowed."""

    def __init__(self, message, deficit=None, suggested_cutoff=None):
        super().__init__(message)
        self.deficit = deficit
        self.suggested_cutoff = suggested_cutoff


class ZeroProbabilityError(ArithmeticError):
    """A post-selected branch has (numerically) zero success probability."""


class UnsupportedMapError(TypeError):
    """The requested evaluator does not apply to this kind of map."""
