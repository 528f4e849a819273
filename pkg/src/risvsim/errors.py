"""Exception hierarchy shared by all simulator modules."""


class RisSimError(Exception):
    """Base class for all simulator errors."""


class GeometryError(RisSimError):
    pass


class OutOfBounds(GeometryError):
    pass


class NoData(GeometryError):
    pass


class IngestError(RisSimError):
    """Raised when map or terrain input cannot be read."""


class MalformedXml(IngestError):
    pass


class HeaderMissing(IngestError):
    pass


class CountMismatch(IngestError):
    pass


class Unreachable(RisSimError):
    pass


class DegeneratePosition(RisSimError):
    pass


class NearFieldViolation(RisSimError):
    pass


class GrazingIncidence(RisSimError):
    pass


class ConfigError(RisSimError):
    pass


class TraceFormatError(RisSimError):
    pass


class EmptyInput(RisSimError, ValueError):
    pass


class TimestampMismatch(RisSimError):
    pass
