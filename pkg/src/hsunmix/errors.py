"""Exception types raised across the toolkit."""


class UnmixingError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(UnmixingError, ValueError):
    """Matrix dimensions do not match the operation's contract."""


class DegenerateColumnError(UnmixingError, ValueError):
    """A column that must carry mass is all zeros."""


class DegenerateSubspaceError(UnmixingError, ValueError):
    """The pixel cloud does not span enough dimensions for the request."""


class DivergenceError(UnmixingError, RuntimeError):
    """A solver produced NaN/Inf entries.

    Attributes
    ----------
    factor : str
        Name of the offending factor ("M", "A", "U", ...).
    iteration : int
        Iteration at which the non-finite value appeared.
    """

    def __init__(self, factor, iteration, message=None):
        self.factor = factor
        self.iteration = iteration
        super().__init__(
            message
            or f"non-finite values in factor {factor!r} at iteration {iteration}"
        )


class LineSearchStallError(UnmixingError, RuntimeError):
    """Armijo backtracking failed to find an acceptable step.

    The solver state reached so far is preserved on the ``state`` attribute.
    """

    def __init__(self, state, which, shrinks):
        self.state = state
        self.which = which
        self.shrinks = shrinks
        super().__init__(
            f"Armijo search for the {which} update stalled after {shrinks} shrinks"
        )


class GenerationError(UnmixingError, RuntimeError):
    """Synthetic data generation could not satisfy its constraints."""


class CubeFormatError(UnmixingError, ValueError):
    """A cube/ground-truth file is malformed or uses unsupported options."""
