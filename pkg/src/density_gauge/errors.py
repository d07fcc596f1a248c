"""Exception types shared by the library and the command line."""


class DensityGaugeError(Exception):
    """Base class for errors raised on bad input or refused work."""


class InputFormatError(DensityGaugeError, ValueError):
    """A malformed input row.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DomainError(DensityGaugeError, ValueError):
    """Geometry outside the normalised domain, or needing too fine a grid.

    ``required_bounds`` carries the bounding box an index would need in order
    to accept the offending input.
    """

    def __init__(self, message: str, required_bounds=None):
        self.required_bounds = required_bounds
        super().__init__(message)


class CapExceeded(DensityGaugeError, ValueError):
    """The brute-force oracle was asked to handle more segments than its cap."""
