"""Exception types shared across the toolkit."""


class MarginForgeError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(MarginForgeError):
    """Vector, model, or dataset dimensionalities do not agree."""


class InvalidDataError(MarginForgeError):
    """Data contains non-finite values or malformed labels."""


class SingleClassError(InvalidDataError):
    """Training data contains only one of the two labels."""


class ConvergenceError(MarginForgeError):
    """The solver exhausted its iteration budget before reaching tolerance.

    Carries the best-so-far training diagnostics in ``diagnostics``.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SchemaError(MarginForgeError):
    """Schema definition, lookup, or compatibility problem."""


class EncodingError(MarginForgeError):
    """A record cannot be turned into coordinates under the schema."""


class MissingValueError(EncodingError):
    """A required value is missing and the field policy rejects it."""


class ParseError(MarginForgeError):
    """Malformed input file. ``line`` is the 1-based offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VersionError(MarginForgeError):
    """Unsupported file format version."""
