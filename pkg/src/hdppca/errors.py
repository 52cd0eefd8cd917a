"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 2, NumericError (and
subclasses) -> 3, RegimeError -> 4.
"""


class HdppcaError(Exception):
    """Base class for all package errors."""


class InputError(HdppcaError):
    """Malformed or out-of-contract input: bad CSV, impossible m, n < 2, ..."""


class NumericError(HdppcaError):
    """Numerical failure: solver breakdown, degenerate spectrum, ..."""


class SubEdgeError(NumericError):
    """Leading sample eigenvalues at or below the bulk support edge."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class ConvergenceError(NumericError):
    """An iterative solver did not converge within its iteration budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class RegimeError(HdppcaError):
    """The operation requires a (p, n) regime the data do not satisfy."""
