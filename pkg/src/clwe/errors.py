"""Exception types shared across the toolkit."""


class FormatError(ValueError):
    """A file or stream violates the expected text format."""


class ConfigError(ValueError):
    """An invalid configuration value or unknown configuration name."""


class DegenerateSeedError(RuntimeError):
    """Seed dictionary construction produced too little material to proceed."""
