"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-raised errors."""


class ConfigError(ToolkitError):
    """Invalid configuration or option value (CLI exit code 2)."""


class InputError(ToolkitError):
    """Missing or malformed input data (CLI exit code 3)."""
