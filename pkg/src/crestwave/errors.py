"""Exception types shared across the solver and its diagnostics."""


class CrestwaveError(Exception):
    """Base class for all solver errors."""


class JacobianError(CrestwaveError):
    """min |Z_{,a'}| fell below the floor; the parametrization is degenerating."""


class A1ViolationError(CrestwaveError):
    """The Taylor factor dropped measurably below 1, signalling discretization breakdown."""


class MarkerCollisionError(CrestwaveError):
    """Lagrangian markers lost their cyclic ordering (under-resolved transport)."""


class UnderResolvedError(CrestwaveError):
    """Too much spectral energy in the top third of the resolved band."""


class HolomorphicityError(CrestwaveError):
    """A field that must be the trace of a holomorphic function failed the residual check."""


class ValidationError(CrestwaveError):
    """Constructed initial data violates an admissibility invariant."""


class ConfigError(CrestwaveError):
    """Malformed or inconsistent run configuration."""
