"""Exception types shared across the package."""


class AnnealmonError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(AnnealmonError):
    """Invalid model construction or an operation applied to an unsuitable model."""


class EvaluationError(AnnealmonError):
    """A sample does not cover the variables of the model it is evaluated against."""


class GraphFormatError(AnnealmonError):
    """Parse or validation failure in one of the text file formats."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmbeddingError(AnnealmonError):
    """Embedding construction or validation failure."""


class CapacityError(EmbeddingError):
    """Requested clique size exceeds what the construction supports."""

    def __init__(self, requested: int, maximum: int):
        super().__init__(
            f"clique size {requested} exceeds construction capacity {maximum}"
        )
        self.requested = requested
        self.maximum = maximum


class NotReadyError(AnnealmonError):
    """Gate queried before burn-in completed or with a degenerate history."""


class ConfigError(AnnealmonError):
    """Invalid experiment configuration or unknown backend name."""


class StageError(AnnealmonError):
    """Pipeline failure, tagged with the stage that caused it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
