"""Exception types shared across the package."""


class CurveAnnError(Exception):
    """Base class for all curveann errors."""


class DimensionMismatch(CurveAnnError, ValueError):
    """Two objects with incompatible point dimensions were combined."""


class InvalidAlignment(CurveAnnError, ValueError):
    """An alignment does not satisfy the monotone step conditions."""


class CapacityExceeded(CurveAnnError, RuntimeError):
    """An enumeration would produce more items than the configured cap."""


class FormatError(CurveAnnError, RuntimeError):
    """A persisted file has the wrong magic or an unsupported version."""


class CorruptFile(FormatError):
    """A persisted file ended prematurely or failed internal checks."""


class ModeMismatch(CurveAnnError, ValueError):
    """An operation was called on a structure built in a different mode."""


class UnsupportedLength(CurveAnnError, ValueError):
    """A query curve has a length the index was not built for."""


class ParseError(CurveAnnError, ValueError):
    """A curve file record could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
