"""Exception types shared across the package."""


class PolarlexError(Exception):
    """Base class for package errors."""


class ConfigError(PolarlexError):
    """Invalid parameter, flag, or missing input path. CLI exit code 1."""


class DataError(PolarlexError):
    """Malformed or inconsistent input data. CLI exit code 2."""
