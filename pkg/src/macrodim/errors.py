"""Exception types shared across the package."""


class MacrodimError(Exception):
    """Base class for errors raised by this package."""


class OutOfShellError(MacrodimError, ValueError):
    """A cell, run, or interval lies outside the span of its shell."""


class CapacityError(MacrodimError, ValueError):
    """An exhaustive routine was asked to handle more than its hard caps allow."""


class GaugeDomainError(MacrodimError, ValueError):
    """A gauge was evaluated outside its domain (e.g. sqrt-log beyond 1/2)."""


class InsufficientDataError(MacrodimError, ValueError):
    """Too few usable shells (or seeds) to fit a scaling exponent."""


class ConfigError(MacrodimError, ValueError):
    """An invalid simulation, query, or experiment configuration."""


class QueryError(ConfigError):
    """A hitting-probability query violates its geometric constraints."""


class SetFileError(MacrodimError, ValueError):
    """A set file failed to parse or validate.

    ``line_no`` is the 1-based line number of the offending line, when known.
    """

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
