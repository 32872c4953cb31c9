"""Exception types shared across the package."""


class OtsegError(Exception):
    """Base class for all otseg errors."""


class UnsupportedFormatError(OtsegError):
    """File format or bit depth outside the supported set."""


class ColorSpaceError(OtsegError):
    """Operation applied to an image in the wrong color space."""


class LabelOverflowError(OtsegError):
    """Label ids exceed what the requested output format can hold."""


class TransportError(OtsegError):
    """Invalid or unsolvable transportation problem."""


class InfeasibleTargetError(OtsegError):
    """Requested region count cannot be reached by merging."""


class MarkerError(OtsegError):
    """Invalid marker input (out of bounds, empty, malformed)."""


class MarkerConflictError(MarkerError):
    """Markers of two different classes fall inside one initial superpixel."""
