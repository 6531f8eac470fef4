"""Exception types shared across the package."""


class OldroydError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveCoupling(OldroydError):
    """kappa, beta, or alpha is not strictly positive."""


class NoDissipation(OldroydError):
    """Both epsilon and mu vanish; neither parameter case applies."""


class OutOfRange(OldroydError):
    """A parameter lies outside its admissible interval."""


class ZeroFrequency(OldroydError):
    """An operation requiring xi != 0 was invoked at the zero mode."""


class GridTooCoarse(OldroydError):
    """Verification grid below the minimum allowed density."""


class QuadratureNotConverged(OldroydError):
    """Doubling the radial quadrature changed the result beyond tolerance."""


class WindowTooNarrow(OldroydError):
    """Fit window does not span the required time ratio."""


class HypothesisViolated(OldroydError):
    """Initial data fail the low-frequency non-degeneracy hypothesis."""


class CflViolation(OldroydError):
    """Requested time step exceeds the advective CFL limit."""


class BlowUp(OldroydError):
    """Solution norm exceeded the blow-up guard threshold."""


class NotSPD(OldroydError):
    """Conformation tensor has a non-positive eigenvalue somewhere."""


class ConfigError(OldroydError):
    """Malformed or incomplete experiment configuration."""
