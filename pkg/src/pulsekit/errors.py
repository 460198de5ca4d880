"""Exception types shared across the library."""


class NumericsError(Exception):
    """Base class for all library-specific failures."""


class DomainError(NumericsError):
    """Input lies outside the valid domain (radius range, sign conditions)."""


class DegeneracyError(NumericsError):
    """Evaluation at or too near a turning point where N^2 = sigma^2."""


class PhaseError(NumericsError):
    """Free phases violate the nondegeneracy condition cos(t1 - t2) != 0."""


class StepFailure(NumericsError):
    """The adaptive step controller failed before reaching the endpoint."""


class BracketFailure(NumericsError):
    """An eigenvalue search window did not bracket the requested target."""


class GapFailure(NumericsError):
    """The verified eigenvalue gap fell below the required lower bound."""


class SingularBVP(NumericsError):
    """A boundary-value determinant fell below the admissibility floor."""


class SingularOperator(NumericsError):
    """The discretized integro-differential operator is numerically singular."""


class DegenerateDenominator(NumericsError):
    """A modulus denominator vanished in scaled arithmetic."""
