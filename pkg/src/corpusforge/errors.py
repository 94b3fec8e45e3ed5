"""Exception types shared across the toolkit.

CLI exit codes: 0 ok, 1 usage, 2 data error, 3 internal.
"""


class CorpusForgeError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3


class UsageError(CorpusForgeError):
    """Bad command-line or function arguments."""

    exit_code = 1


class DataError(CorpusForgeError):
    """Invalid input data (encoding, empty inputs, malformed records)."""

    exit_code = 2


class ConfigError(CorpusForgeError):
    """Invalid or missing configuration (profiles, spaces, pipeline config)."""

    exit_code = 2
