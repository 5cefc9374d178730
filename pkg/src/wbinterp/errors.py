"""Exception types raised by the library."""


class WBInterpError(Exception):
    """Base class for all library errors."""


class DiskDomainError(WBInterpError, ValueError):
    """A point that must lie in the open unit disk does not."""


class StencilError(WBInterpError, ValueError):
    """A finite-difference stencil leaves the unit disk."""


class EmptyInputError(WBInterpError, ValueError):
    pass


class ClusterTooLargeError(WBInterpError):
    """A cluster cannot be covered by a region of diameter at most R."""


class InfeasibleConstraintsError(WBInterpError):
    """Jet constraints are rank deficient for the chosen polynomial space."""


class NonConvergenceError(WBInterpError):
    """An iterative solver stopped before reaching its tolerance.

    The best value found so far is stored on ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CoverageError(WBInterpError):
    """A grid or partition of unity does not cover the requested set."""


class ProductDivisionError(WBInterpError):
    """f does not vanish on Z to the required order."""


class ResolutionError(WBInterpError):
    """A numerical self-check failed; the resolution is too coarse."""
