"""Exception types raised across the package.

Every error that callers may want to handle separately gets its own class;
all of them derive from :class:`RbmStreamError` so a single ``except`` can
catch anything raised by this package.
"""


class RbmStreamError(Exception):
    """Base class for all errors raised by rbmstream."""


class KeyFormatError(RbmStreamError):
    """Cipher code string is malformed or out of the open interval (0, 1)."""


class DimensionError(RbmStreamError):
    """Vector or matrix sizes do not line up, or a dimension is zero."""


class RowRangeError(RbmStreamError):
    """Requested weight row does not exist."""


class CapacityError(RbmStreamError):
    """Requested output exceeds what the configured model can supply."""


class ModeError(RbmStreamError):
    """Operation invoked with inputs that its mode does not allow."""


class FormatError(RbmStreamError):
    """Binary file or frame does not match its declared format."""


class ChannelError(RbmStreamError):
    """Channel split/merge called on images with the wrong channel layout."""


class NumericError(RbmStreamError):
    """Non-finite values encountered where finite floats are required."""


class GeometryError(RbmStreamError):
    """Image too small for the requested neighbour offset."""


class DegenerateVarianceError(RbmStreamError):
    """Correlation requested over a constant coordinate."""


class EmptyInputError(RbmStreamError):
    """Statistic requested over an empty or undersized sample."""
