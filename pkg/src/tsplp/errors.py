"""Exception types raised across the package."""


class TspLpError(Exception):
    """Base class for all package errors."""


class ConfigError(TspLpError, ValueError):
    """Invalid generator, build or solver configuration."""


class GenerationError(TspLpError):
    """Random instance generation could not satisfy its constraints."""


class ValidationError(TspLpError, ValueError):
    """An argument (tour, index tuple, weight vector, ...) is malformed."""


class DomainError(TspLpError, ValueError):
    """Input lies outside the domain of the model (e.g. too few cities)."""


class ParseError(TspLpError, ValueError):
    """A file could not be parsed. Carries the offending location."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"row {line}" if column is None else f"row {line}, column {column}")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)
