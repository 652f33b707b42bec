"""Exception hierarchy for the erasure-coded solver package."""


class ErasureCGError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(ErasureCGError, ValueError):
    """Malformed Matrix Market input (banner, size line, entry line)."""


class UnsupportedFormatError(FormatError):
    """Well-formed Matrix Market input of a kind this package does not read."""


class BoundsError(ErasureCGError, IndexError):
    """An index lies outside the declared dimensions."""


class DimensionError(ErasureCGError, ValueError):
    """Operand shapes do not agree."""


class InvalidSizeError(ErasureCGError, ValueError):
    """A size or count argument is outside its admissible range."""


class SymmetryError(ErasureCGError, ValueError):
    """A matrix required to be symmetric is not stored symmetrically."""


class BudgetError(ErasureCGError, RuntimeError):
    """A dense or combinatorial computation would exceed its desk-scale budget."""


class FaultCapacityError(ErasureCGError, ValueError):
    """A fault plan would fault more components than the encoding tolerates."""


class NumericalFailure(ErasureCGError, ArithmeticError):
    """NaN or Inf appeared in a solver aggregate."""


class UnrecoverableFaultSet(ErasureCGError, ArithmeticError):
    """The encoding rows at the faulty indices are linearly dependent."""


class NotConvergedError(ErasureCGError, RuntimeError):
    """Recovery was requested from a solve that did not converge."""


class ZeroRightHandSide(ErasureCGError, ZeroDivisionError):
    """Relative residual is undefined because ``b`` is the zero vector."""

    def __init__(self, absolute_residual):
        super().__init__(
            f"b is zero; absolute residual norm is {absolute_residual!r}")
        self.absolute_residual = absolute_residual
