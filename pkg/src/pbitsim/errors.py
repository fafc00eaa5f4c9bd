"""Exception hierarchy. All domain failures derive from PbitError so the CLI
can map them to a single exit code."""


class PbitError(Exception):
    """Base class for domain errors raised by this package."""


class DimensionError(PbitError, ValueError):
    """State/model/index shape mismatch."""


class CapacityError(PbitError, ValueError):
    """Problem too large for an exact/enumeration routine."""


class ConfigError(PbitError, ValueError):
    """Invalid solver or study configuration."""


class EncodingError(PbitError, ValueError):
    """Invalid encoder parameters (e.g. penalty weights that void guarantees)."""


class InfeasibleError(PbitError, ValueError):
    """Requested construction cannot exist (e.g. edge larger than vertex set)."""


class FileFormatError(PbitError, ValueError):
    """Malformed input file."""


class PipelineError(PbitError, RuntimeError):
    """A multi-stage procedure aborted; the message carries the diagnostic."""
