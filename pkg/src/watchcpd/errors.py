"""Exception types shared across the package."""


class WatchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(WatchError):
    """Malformed data, bad argument values, or file contents that fail validation."""


class ConfigError(WatchError):
    """Detector or benchmark configuration violates its invariants."""


class UnsupportedInstanceError(WatchError):
    """Instance outside the size limits of a brute-force routine."""


class DegenerateBufferError(WatchError):
    """Buffer state on which the threshold is undefined (fewer than two batches)."""
