"""Exception types shared across the package.

The CLI maps these onto exit codes, so user-input problems (config, map
files) are kept distinct from computation-domain problems.
"""


class PdqwError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PdqwError, ValueError):
    """Input violates a mathematical precondition (normalization, range, shape)."""


class CapacityError(PdqwError, ValueError):
    """A walk step would leave the allocated lattice."""


class MapParseError(PdqwError, ValueError):
    """A phase-map file is malformed.

    `line` is the 1-based line number in the file, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(PdqwError, ValueError):
    """A configuration value is invalid. Always names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class AmbiguityError(PdqwError, RuntimeError):
    """A quantity that must be unique (e.g. a curve crossing) is not."""
