"""Exception hierarchy shared across the package."""


class StreamPCAError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(StreamPCAError):
    """Operands have incompatible shapes."""


class InvalidDims(StreamPCAError):
    """Requested dimensions are out of range (e.g. k > d)."""


class NearZeroVector(StreamPCAError):
    """A vector with norm at or below the zero threshold cannot be normalized."""


class RankDeficient(StreamPCAError):
    """A column's residual vanished during orthonormalization.

    ``column`` is the zero-based index of the offending column.
    """

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column} is numerically dependent "
                                    "on the preceding columns")


class ParseError(StreamPCAError):
    """A field of a trajectory file failed to parse as a finite real.

    Carries the 1-based ``line`` and field ``column`` plus the absolute
    ``byte_offset`` of the offending field.
    """

    def __init__(self, line, column, byte_offset, message=None):
        self.line = line
        self.column = column
        self.byte_offset = byte_offset
        super().__init__(message or f"line {line}, field {column} "
                                    f"(byte {byte_offset}): not a finite real")


class RaggedRows(StreamPCAError):
    """A row's field count differs from the established row arity."""

    def __init__(self, expected, got, line):
        self.expected = expected
        self.got = got
        self.line = line
        super().__init__(f"line {line}: expected {expected} fields, got {got}")


class InsufficientSamples(StreamPCAError):
    """Too few samples for the requested decomposition."""


class ZeroEnergy(StreamPCAError):
    """The reference basis captures zero energy (all-zero data)."""


class SchemaMismatch(StreamPCAError):
    """Record files do not share the expected column schema."""


class TrialError(StreamPCAError):
    """A trial aborted mid-stream; ``records`` holds the rows logged so far."""

    def __init__(self, message, records):
        self.records = records
        super().__init__(message)


class DegenerateSpectrum(UserWarning):
    """The requested eigenbasis is not unique (trailing eigengap ~ 0)."""
