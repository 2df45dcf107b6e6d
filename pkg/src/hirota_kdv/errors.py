"""Exception types shared across the package."""


class BadParams(ValueError):
    """(N, M) outside the admissible range: need N > M >= 1 and gcd(N, M) = 1."""


class BadParity(ValueError):
    """Operation only defined for the other parity of N + M."""


class SingularPoint(ZeroDivisionError):
    """A denominator vanished while evaluating at a point; resample."""


class SingularStep(SingularPoint):
    """A recurrence step divided by zero.

    ``index`` is the lattice index of the value that could not be produced,
    when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SpanFailure(RuntimeError):
    """Shift-generated vectors do not span the image of the exchange matrix."""


class Inconsistent(RuntimeError):
    """A linear system that must be solvable has no exact solution."""


class DimensionFailure(RuntimeError):
    """A constraint nullspace has the wrong dimension."""


class PeriodicityViolation(ValueError):
    """Coefficients recovered from an orbit are not periodic."""
