"""
Workbench error hierarchy

Every failure the workbench raises on purpose derives from WorkbenchError so
callers (the CLI in particular) can tell expected failures from bugs.
"""


class WorkbenchError(Exception):
    """Root of all workbench errors."""

    exit_code = 1


class ConfigError(WorkbenchError):
    """Invalid, unknown or inconsistent configuration."""


class IntegrityError(WorkbenchError):
    """Shipped fixture or grammar mismatch."""

    exit_code = 3


class DimensionError(WorkbenchError):
    """State vector length or object count does not fit the consumer."""


class ShapeError(WorkbenchError):
    """Tensor shapes do not match a layer or optimiser."""


class StaleTapeError(WorkbenchError):
    """A tape was recorded before the latest parameter update."""


class EmptySequenceError(WorkbenchError):
    """A token sequence with no tokens was given to the language model."""


class RejectedHintError(WorkbenchError):
    """A goal hint cannot be satisfied by a sampled scene."""


class EpisodeFinishedError(WorkbenchError):
    """A scene was stepped past its horizon."""


class NoTargetError(WorkbenchError):
    """The scripted controller found nothing in the scene to act upon."""


class NotATestGoalError(WorkbenchError):
    """A generalization type was requested for a training goal."""


class PretrainFailedError(WorkbenchError):
    """The OR network did not reach its accuracy threshold."""


class EmptyRegistryError(WorkbenchError):
    """Hindsight relabelling was asked for with no discovered goals."""


class NonFiniteLossError(WorkbenchError):
    """A training loss became NaN or infinite."""


class MissingCoverageError(WorkbenchError):
    """A report does not cover every generalization type."""


class UnsupportedVariantError(WorkbenchError):
    """The architecture variant cannot run the requested study."""


class UndefinedTestError(WorkbenchError):
    """A statistical test is undefined for the given samples."""


class SchemaVersionError(WorkbenchError):
    """A persisted file was written with another schema version."""


class TruncatedFileError(WorkbenchError):
    """A persisted file ends before its declared content."""
