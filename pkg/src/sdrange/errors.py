class SdrangeError(Exception):
    """Base class for library errors."""


class ConfigMismatch(SdrangeError, ValueError):
    """Two sketches or indexes do not share a hash family or parameters."""


class ModeMismatch(SdrangeError, ValueError):
    """An index was queried in a sketch mode it was not built for."""


class DataError(SdrangeError, ValueError):
    """Malformed, duplicate or out-of-range input records."""


class FormatError(SdrangeError, ValueError):
    """A serialized sketch or index file is corrupt or incompatible."""
