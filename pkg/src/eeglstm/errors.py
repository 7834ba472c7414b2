"""Exception types shared across the package."""


class EegLstmError(Exception):
    """Base class for every package-specific error."""


class ShapeError(EegLstmError, ValueError):
    """Operands have incompatible or unexpected shapes."""


class IngestionError(EegLstmError, ValueError):
    """A data directory or file violates the expected on-disk format."""


class CheckpointError(EegLstmError, ValueError):
    """A checkpoint file is unreadable or inconsistent with the requested model."""


class MetricUndefinedError(EegLstmError, ValueError):
    """A requested metric has no defined value for the given inputs."""
