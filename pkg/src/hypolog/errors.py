"""Exception types shared across the library."""


class HypologError(Exception):
    """Base class for all library errors."""


class InvalidInput(HypologError):
    """An argument violates a documented precondition."""


class SingularMatrix(HypologError):
    """A spectral operation (log, fractional power, inverse) hit an
    eigenvalue at or below the eigenvalue floor."""


class SingularState(HypologError):
    """A density matrix required to be strictly positive is singular."""


class DegenerateGenerator(HypologError):
    """A semigroup generator has no usable spectral gap (zero generator,
    or kernel inconsistent with its fixed-point algebra)."""


class DegenerateDenominator(HypologError):
    """An entropy denominator vanished (state equals its equilibrium)."""


class DegenerateEnsemble(HypologError):
    """Every sample in an ensemble was degenerate (all ratios 0/0)."""


class NonIntegrableTail(HypologError):
    """A measured decay curve has a non-negative fitted tail rate, so its
    integral over [0, inf) cannot be completed."""
