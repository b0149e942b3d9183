"""Exception types shared across the package."""


class LgmdError(Exception):
    """Base class for all package-specific errors."""


class ZeroVariance(LgmdError):
    """A matrix or column has (numerically) zero standard deviation."""


class DegenerateInput(LgmdError):
    """Input row/column carries no usable information (e.g. fully unobserved)."""


class NearSingularPair(LgmdError):
    """A retained covariance pair makes the closed-form precision entry blow up."""


class NotConverged(LgmdError):
    """An iterative solver hit its iteration cap before meeting its tolerance."""


class NotPositiveDefinite(LgmdError):
    """A matrix required to be positive definite failed a Cholesky factorization."""


class NonFinite(LgmdError):
    """An update produced NaN or infinite entries (usually a divergent penalty)."""


class EmptySelection(LgmdError):
    """A boolean selector picked no entries."""


class RankDeficient(LgmdError):
    """Orthonormalization dropped every column of an input matrix."""


class DegenerateMask(LgmdError):
    """A requested observation mask cannot keep every row and column non-empty."""


class ParseError(LgmdError):
    """A matrix file failed to parse.

    Carries 1-based ``line`` and ``column`` attributes when known.
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionMismatch(LgmdError):
    """Rows of a matrix file disagree in length, or shapes are inconsistent."""


class ConfigError(LgmdError):
    """An experiment configuration is invalid (unknown key, bad value, ...)."""


class IoError(LgmdError):
    """Reading or writing a report/matrix file failed."""
