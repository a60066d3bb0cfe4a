"""Exception types shared across the package."""


class GlstarsError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(GlstarsError):
    """A matrix required to be positive definite is not.

    Callers decide whether this is a bug (e.g. a miscomputed covariance)
    or a property of the data (e.g. a singular sample covariance with
    fewer samples than variables).
    """


class DimensionMismatch(GlstarsError):
    """Operands have incompatible shapes."""


class NonFinite(GlstarsError):
    """An input contains NaN or infinite entries."""


class InvalidBlockSize(GlstarsError):
    """Subsample block size b is outside the open interval (1, n)."""


class InvalidRho(GlstarsError):
    """Edge weight rho is outside (0, 1)."""


class InvalidGroupSize(GlstarsError):
    """Hub group size s is outside [2, p)."""


class ConfigError(GlstarsError):
    """An experiment configuration failed validation."""
