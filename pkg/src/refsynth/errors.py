"""Exception hierarchy shared across the package."""


class RefsynthError(Exception):
    """Base class for all package errors."""


class ValidationError(RefsynthError):
    """Invalid input. Carries the offending field name when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class StorageError(RefsynthError):
    """Underlying persistence failure."""


class EmptyCorpusError(RefsynthError):
    """Retrieval attempted against an empty store."""


class EmbeddingUnavailableError(RefsynthError):
    """Embedding backend failed after retries.

    ``failed_indices`` identifies which inputs of the batch could not be
    embedded.
    """

    def __init__(self, message: str, failed_indices: list[int] | None = None):
        super().__init__(message)
        self.failed_indices = failed_indices or []


class SynthesisError(RefsynthError):
    """LLM synthesis call failed; summaries are preserved by the caller."""


class PipelineError(RefsynthError):
    """Unrecoverable pipeline condition (e.g. no usable sources)."""
