"""Exception hierarchy.

Input problems (bad files, bad arguments) derive from :class:`InputError`;
everything raised by a computation that could not be completed derives from
:class:`NumericalError`.  The CLI maps these to exit codes 2 and 3.
"""


class DaepsaError(Exception):
    """Base class for all package errors."""


class InputError(DaepsaError, ValueError):
    """Raised when an argument or input file is invalid."""


class MatrixMarketError(InputError):
    """Raised when a Matrix Market file cannot be parsed.

    ``line`` holds the 1-based line number of the offending line, if known.
    """

    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class NumericalError(DaepsaError, ArithmeticError):
    """Raised when a computation cannot be completed reliably."""


class ConvergenceError(NumericalError):
    """Raised when an iteration exhausts its budget.

    ``index`` names the stalled position (for instance the Schur index that
    failed to deflate), ``partial`` carries whatever was computed so far.
    """

    def __init__(self, msg, index=None, partial=None):
        super().__init__(msg)
        self.index = index
        self.partial = partial


class SingularMatrixError(NumericalError):
    """Raised when a matrix is singular to working precision.

    ``index`` is the offending diagonal/pivot position (0-based) when a
    factorization identified one; ``condition`` is a condition estimate when
    one was computed.
    """

    def __init__(self, msg, index=None, condition=None):
        super().__init__(msg)
        self.index = index
        self.condition = condition


class NotPositiveDefiniteError(SingularMatrixError):
    """Raised by Cholesky when a non-positive pivot is met."""


class RankDeficiencyError(SingularMatrixError):
    """Raised by QR when a column is (numerically) dependent on earlier ones."""


class OverflowMatrixError(NumericalError, OverflowError):
    """Raised when a matrix function would overflow; carries ``norm``."""

    def __init__(self, msg, norm=None):
        super().__init__(msg)
        self.norm = norm


class SingularPencilError(NumericalError):
    """Raised when no admissible shift makes ``A - mu E`` invertible.

    ``conditions`` maps each tried shift to its condition estimate.
    """

    def __init__(self, msg, conditions=None):
        super().__init__(msg)
        self.conditions = dict(conditions or {})


class InconsistentInitialConditionError(InputError):
    """Raised when an initial state violates the algebraic constraints.

    ``residual`` is ``||(I - Q Q*) x0||`` and ``projected`` the consistent
    part ``Q Q* x0`` the caller may want to use instead.
    """

    def __init__(self, msg, residual=None, projected=None):
        super().__init__(msg)
        self.residual = residual
        self.projected = projected
