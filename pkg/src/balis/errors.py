"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid parameter combination or malformed input."""


class GuardError(RuntimeError):
    """A size guard protecting an exponential-cost code path was violated."""


class GraphFormatError(ConfigError):
    """Malformed graph file."""


class UnrevealedPairError(RuntimeError):
    """An online algorithm tried to read an edge it has not been shown."""
