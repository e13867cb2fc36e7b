"""Exception hierarchy. Every error raised by the package derives from EncodingError."""


class EncodingError(Exception):
    pass


class ValidationError(EncodingError, ValueError):
    pass


class SegmentationError(EncodingError, ValueError):
    pass


class LengthError(EncodingError, ValueError):
    pass


class ShapeError(EncodingError, ValueError):
    pass


class ConfigError(EncodingError, ValueError):
    pass


class CapacityError(EncodingError, ValueError):
    pass


class GateError(EncodingError, ValueError):
    pass


class WireIndexError(EncodingError, IndexError):
    pass


class IngestionError(EncodingError, OSError):
    """A dataset or key file could not be read or is malformed. Message names the file."""


class TrainingError(EncodingError, ValueError):
    pass


class UndefinedMetricError(EncodingError, ValueError):
    pass


class SampleSizeError(EncodingError, ValueError):
    pass


class AlignmentError(EncodingError, ValueError):
    pass


class FeatureLookupError(EncodingError, KeyError):
    pass
