"""Exception types raised by extremoboot."""

__all__ = [
    "ConfigError",
    "DegenerateNormalizationError",
    "DegenerateThresholdError",
    "MissingOracleError",
    "NoBandError",
    "NoIntervalError",
]


class DegenerateThresholdError(ValueError):
    """The estimated threshold is not positive."""


class DegenerateNormalizationError(ValueError):
    """The process normalization ``n * v_n`` vanishes."""


class NoIntervalError(ValueError):
    """Every bootstrap replicate at a lag is undefined."""


class NoBandError(ValueError):
    """No bootstrap replicate row is defined at every lag."""


class ConfigError(ValueError):
    """A configuration value is missing or malformed.

    ``field`` names the offending key.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class MissingOracleError(FileNotFoundError):
    """No cached pre-asymptotic oracle exists for a requested key."""

    def __init__(self, key: str, path):
        self.key = key
        self.path = path
        super().__init__(
            f"no pre-asymptotic oracle cached for key [{key}] (expected {path}); "
            "build it with `extremoboot oracle --config <file>`"
        )
