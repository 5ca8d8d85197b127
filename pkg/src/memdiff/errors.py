"""Exception types raised by memdiff."""


class MemdiffError(Exception):
    """Base class for memdiff errors."""


class DomainError(MemdiffError, ValueError):
    """A parameter lies outside its admissible range."""


class GridMismatchError(MemdiffError, ValueError):
    """Operands were built on different time or space grids."""


class SingularDeconvolutionError(MemdiffError, ValueError):
    """Deconvolution impossible: the leading kernel weight vanishes."""


class InconsistentPairError(MemdiffError, ValueError):
    """The supplied kernel pair does not convolve to the constant 1."""


class ConfigurationError(MemdiffError, ValueError):
    """A solver configuration violates its preconditions."""


class StepFailureError(MemdiffError, RuntimeError):
    """The implicit step did not converge; carries the final residual."""

    def __init__(self, message, residual=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.step = step


class SupportError(MemdiffError, ValueError):
    """A test function is not supported away from the boundary."""
