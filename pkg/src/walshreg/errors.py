"""Exception hierarchy shared by all walshreg modules."""


class WalshRegError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(WalshRegError):
    """Array shapes do not match what an operation requires."""


class ParameterError(WalshRegError):
    """A scalar parameter (base, bin count, search step, ...) is out of range."""


class EncodingError(WalshRegError):
    """A digit sequence cannot be packed in the requested number base."""


class MetricError(WalshRegError):
    """A similarity metric is undefined for the given inputs.

    ``kind`` is one of ``"empty_overlap"``, ``"zero_variance"`` or
    ``"degenerate_input"`` so callers can report the failure the same way
    for every metric.
    """

    def __init__(self, kind, message=None):
        super().__init__(message or kind)
        self.kind = kind


class ImageIOError(WalshRegError):
    """An image file is missing, malformed or in an unsupported format."""
