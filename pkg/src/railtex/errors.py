"""Exception types shared across the railtex pipeline."""


class RailTexError(Exception):
    """Base class for every error this package raises on purpose."""


class ImageIOError(RailTexError):
    """Image file could not be read or written.

    ``kind`` is one of "file-missing", "unsupported-format", "corrupt-data",
    "io-failure"; ``path`` is the offending file.
    """

    def __init__(self, kind: str, path, detail: str = ""):
        self.kind = kind
        self.path = str(path)
        msg = f"{kind}: {path}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InvalidParameterError(RailTexError, ValueError):
    """A parameter violates an operation's precondition."""


class DimensionMismatchError(RailTexError):
    """Two inputs that must share dimensions do not."""


class DegenerateImageError(RailTexError):
    """Image has a single gray level, so no threshold split exists."""


class EmptyMaskError(RailTexError):
    """Mask generation produced no foreground pixels."""


class TooFewSamplesError(RailTexError):
    """Not enough samples to fit the requested model."""


class ConvergenceError(RailTexError):
    """An iterative solver failed to reach its tolerance."""


class DatasetError(RailTexError):
    """Dataset tree is missing, empty, or unreadable."""


class ConfigError(RailTexError):
    """Run configuration file is malformed or holds unknown keys."""


class ModelFormatError(RailTexError):
    """Model file is corrupt or has an unsupported format version."""


class StageError(RailTexError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: Exception, context: str = ""):
        self.stage = stage
        self.cause = cause
        msg = f"stage '{stage}' failed: {cause}"
        if context:
            msg = f"stage '{stage}' failed on {context}: {cause}"
        super().__init__(msg)
