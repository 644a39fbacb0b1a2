"""Exception hierarchy shared by all modules."""


class EntGaussError(Exception):
    """Base class for errors raised by entgauss."""


class DomainError(EntGaussError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(EntGaussError, RuntimeError):
    """An iterative method did not converge within its budget."""


class BracketError(ConvergenceError):
    """A root could not be bracketed."""


class PrecisionError(EntGaussError, RuntimeError):
    """The requested accuracy cannot be certified."""


class PreconditionError(DomainError):
    """A bound was requested outside the range where it is valid."""
