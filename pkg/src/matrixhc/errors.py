"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code (see :mod:`matrixhc.cli`).
"""


class MatrixHCError(Exception):
    """Base class for all package errors."""


class GuardError(MatrixHCError, ValueError):
    """A size or budget guard was exceeded."""


class NumericalError(MatrixHCError, ArithmeticError):
    """A decomposition failed or produced an inaccurate result."""


class PreconditionError(MatrixHCError, ValueError):
    """An input does not satisfy the hypothesis an operation requires."""


class FormatError(MatrixHCError, ValueError):
    """A serialized file is malformed."""


class ViolationError(MatrixHCError, AssertionError):
    """An inequality that must hold was found violated."""
