"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or malformed input data."""


class NumericalError(RuntimeError):
    """A numerical routine produced a non-finite or uncertifiable result."""
