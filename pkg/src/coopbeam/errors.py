"""Exception hierarchy for coopbeam.

Every error raised deliberately by the package derives from
:class:`CoopBeamError`, so callers can catch the whole family at once.
Argument-style errors additionally derive from :class:`ValueError`.
"""


class CoopBeamError(Exception):
    """Base class of all package errors."""


# -- numerics ---------------------------------------------------------------

class NotHermitian(CoopBeamError, ValueError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NotPositiveDefinite(CoopBeamError, ArithmeticError):
    """Cholesky factorization met a non-positive pivot."""


class IndefiniteBeyondTolerance(CoopBeamError, ArithmeticError):
    """Eigenvalue below the clamping threshold of a PSD square root."""


class InvalidRho(CoopBeamError, ValueError):
    """Correlation coefficient (or ADMM penalty) outside its valid range."""


class DimensionMismatch(CoopBeamError, ValueError):
    pass


# -- topology / channel -----------------------------------------------------

class EmptyNetwork(CoopBeamError, ValueError):
    pass


class InvalidParam(CoopBeamError, ValueError):
    pass


class InvalidTopology(CoopBeamError, ValueError):
    """Edge set violates a topology invariant (e.g. an isolated node)."""


# -- algorithms -------------------------------------------------------------

class ZeroPrecoder(CoopBeamError, ArithmeticError):
    pass


class SingularSigma(CoopBeamError, ArithmeticError):
    pass


class SingularTbar(CoopBeamError, ArithmeticError):
    pass


# -- configuration ----------------------------------------------------------

class ConfigError(CoopBeamError, ValueError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    """Config value rejected; ``path`` names the offending key."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
