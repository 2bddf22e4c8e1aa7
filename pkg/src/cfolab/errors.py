"""Exception hierarchy for cfolab."""


class CfoLabError(Exception):
    """Base class for all cfolab errors."""


class InvalidConstellation(CfoLabError):
    """QAM order is not a perfect square >= 4."""


class FrameShapeError(CfoLabError):
    """Input array length does not match the configured frame geometry."""


class InvalidProfile(CfoLabError):
    """Power-delay profile is empty, negative, unnormalized, or too long."""


class CfoOutOfRange(CfoLabError):
    """Requested CFO lies outside the fractional range [-0.5, 0.5)."""


class EmptySubset(CfoLabError):
    """A lag index set must contain at least one lag."""


class DegenerateCorrelation(CfoLabError):
    """Aggregate lag product is exactly zero; the phase is undefined."""


class LambdaOutOfRange(CfoLabError):
    """Subset size must lie in [1, 2L]."""


class ShapeError(CfoLabError):
    """Tap vector has the wrong length."""


class LagOutOfRange(CfoLabError):
    """Lag index must lie in [0, 2L)."""


class SingularFisher(CfoLabError):
    """Fisher information is singular (zero noise with a fully correlated lag)."""


class ParseError(CfoLabError):
    """Results file is malformed; message carries line/field context."""


class ConfigError(CfoLabError):
    """Scenario configuration is invalid; message names the offending key."""
