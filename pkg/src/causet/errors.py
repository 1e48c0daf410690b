"""Exception types raised by the engine."""


class CausetError(Exception):
    """Base class for all engine errors."""


class DomainError(CausetError, ValueError):
    """A point lies outside the chart on a non-periodic axis."""


class ConfigError(CausetError, ValueError):
    """Invalid parameters for a model, chain graph or run configuration."""


class ConstructionError(CausetError):
    """A derived geometric object could not be built (e.g. non-timelike orientation)."""


class GenerationError(CausetError):
    """Curve sampling hit a node without causal steps."""
