"""Exception types shared across the package."""


class ModulusError(Exception):
    """Base class for all package errors."""


class InputError(ModulusError, ValueError):
    """Malformed user input: graphs, documents, vertices, or flags."""


class ParameterError(InputError):
    """A numeric parameter is outside its documented domain."""


class UnsupportedOperationError(ModulusError):
    """Operation not defined for this kind of graph."""


class ConvergenceError(ModulusError):
    """The solver could not certify the requested tolerance.

    Carries the last certified bounds so callers can diagnose how far the
    run got before giving up.
    """

    def __init__(self, message, *, primal=None, dual=None, gap=None):
        super().__init__(message)
        self.primal = primal
        self.dual = dual
        self.gap = gap


class InternalError(ModulusError):
    """An internal invariant failed; indicates a bug, not bad input."""
