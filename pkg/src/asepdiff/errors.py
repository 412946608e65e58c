"""Exception hierarchy shared by all modules."""


class AsepdiffError(Exception):
    """Base class for all library errors."""


class KernelError(AsepdiffError):
    """A jump law failed validation."""


class ZeroSiteWeight(KernelError):
    """A weight was assigned to the origin; p(0) must be absent."""


class NotNormalized(KernelError):
    """Weights do not sum to 1 within tolerance."""


class NegativeWeight(KernelError):
    """A weight outside (0, 1] was supplied."""


class DuplicateVector(KernelError):
    """The same jump vector appears twice."""


class AlgebraError(AsepdiffError):
    """Invalid operation on local functions."""


class UncoveredSite(AlgebraError):
    """A configuration does not cover the support of the function."""


class DensityMismatch(AlgebraError):
    """Two local functions over different densities were combined."""


class NonCenteredInput(AlgebraError):
    """An operation requiring a mean-zero function received one with
    a nonzero constant term."""


class NotInG(AlgebraError):
    """Quotient reduction requires membership in the fluctuation class
    (zero mean and zero density-derivative of the mean)."""


class BoxTooLarge(AlgebraError):
    """Brute-force enumeration refused: more than 24 sites."""


class SolverError(AsepdiffError):
    """Numerical solve could not be completed."""


class SingularDirichlet(SolverError):
    """The Dirichlet matrix is numerically singular beyond the
    pseudo-inverse threshold; shrink the basis or adjust the cutoff."""


class SingularQ(SolverError):
    """Q is not invertible at this truncation; no result is reported."""


class MonotonicityError(SolverError):
    """A nested-basis study produced increasing residuals."""


class ConfigError(AsepdiffError):
    """Run configuration could not be parsed."""
