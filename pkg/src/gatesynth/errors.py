"""Exception types shared across the package."""


class GateSynthError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GateSynthError):
    """Operand dimensions are invalid or incompatible."""


class NonHermitianError(GateSynthError):
    """An operator that must be Hermitian is not, within tolerance."""


class InvalidInputError(GateSynthError):
    """An argument is outside its documented domain."""


class DegeneracyError(GateSynthError):
    """Dressed-state labeling is ambiguous: two eigenstates claim the same bare label."""


class PhaseAnchorError(GateSynthError):
    """The (0,0) phase anchor of an error matrix vanishes; the message names a usable index."""


class GradientEvaluationError(GateSynthError):
    """A finite-difference stencil evaluation failed; the message names the parameter."""


class ConfigError(GateSynthError):
    """An experiment config failed validation; the message names the offending field."""
