"""Exception types shared across the package."""


class QcaError(Exception):
    """Base class for all errors raised by qcalab."""


class ProblemTooLarge(QcaError):
    """A dense object would exceed the configured size cap."""


class SupportCapExceeded(QcaError):
    """A conjugated operator grew beyond the configured number of sites."""


class ConfigError(QcaError):
    """A circuit definition file failed to parse or validate."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class AnomalyError(QcaError):
    """A numerical result violated a structural expectation (e.g. non-integer subcell dimension)."""
