"""Exception types shared across the library."""


class ConventionError(ValueError):
    """An operation received a tensor in the wrong index convention."""


class SymmetryError(ValueError):
    """A matrix or tensor violates a symmetry required by an operation."""


class SzSymmetryError(SymmetryError):
    """A coefficient tensor contains Sz-violating entries above tolerance."""


class DecompositionError(RuntimeError):
    """A factorization step failed (non-convergence, rank violation, ...)."""


class OracleCapError(ValueError):
    """Requested dense Fock-space build exceeds the configured mode cap."""
