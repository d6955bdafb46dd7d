"""Exception types shared across the package."""


class CrowdspanError(Exception):
    """Base class for all crowdspan errors."""


class RecordParseError(CrowdspanError):
    """A corpus line could not be parsed (bad JSON or wrong field types)."""


class ValidationError(CrowdspanError):
    """Data violates a documented invariant."""


class ConfigError(CrowdspanError):
    """Invalid configuration value or combination."""


class NumberParseError(CrowdspanError):
    """Token sequence is not a recognizable number phrase."""
