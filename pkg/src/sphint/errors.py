"""Exception types shared across the library."""


class SphintError(Exception):
    """Base class for all library errors."""


class DomainError(SphintError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ShapeError(SphintError, ValueError):
    """Mismatched lengths or dimensions between paired arguments."""


class NumericalError(SphintError, ArithmeticError):
    """A quadrature or numerical evaluation failed to reach its tolerance."""


class ConvergenceError(SphintError, RuntimeError):
    """An iterative optimizer or root finder failed to converge."""


class AssumptionError(SphintError, ValueError):
    """A structural assumption required by the operation does not hold."""
