"""Exception types raised across the package.

Every precondition violation has a dedicated class so callers (and the CLI
validator) can tell configuration mistakes apart from numerical failures.
"""


class LandauSpecError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedDimensionError(LandauSpecError, ValueError):
    """Orbital evaluation requested for a transverse dimension we do not build."""


class DivergentNormError(LandauSpecError, ValueError):
    """Envelope L^p norm does not converge for the given exponents."""


class PoleError(LandauSpecError, ValueError):
    """Resolvent evaluated at (or too close to) a free eigenvalue."""


class BranchError(LandauSpecError, ValueError):
    """Square-root argument landed on the branch cut [0, +inf)."""


class QuadratureAccuracyError(LandauSpecError, RuntimeError):
    """Doubled-resolution quadrature check disagreed beyond tolerance."""


class NearSpectrumError(LandauSpecError, RuntimeError):
    """Linear solve hit a (numerically) singular shifted operator."""


class BoundaryZeroError(LandauSpecError, RuntimeError):
    """A zero of the scanned function sits on (or hugs) the contour."""


class WindingDefectError(LandauSpecError, RuntimeError):
    """Contour integral failed to round cleanly to an integer."""


class MaxDepthError(LandauSpecError, RuntimeError):
    """Adaptive subdivision exceeded its depth budget."""


class BadNormalizationPointError(LandauSpecError, ValueError):
    """Disk pullback normalization point is a zero of the function."""


class RectangleTooShortError(LandauSpecError, ValueError):
    """Rectangle cannot accommodate an admissible interior anchor point."""


class ConfigError(LandauSpecError, ValueError):
    """Run configuration failed validation (CLI exit code 2)."""
