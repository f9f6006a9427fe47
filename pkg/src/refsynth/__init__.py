"""refsynth: retrieval-and-synthesis engine for citation-grounded
related-work generation over an arXiv-style corpus."""

from .errors import (
    EmbeddingUnavailableError,
    EmptyCorpusError,
    PipelineError,
    RefsynthError,
    StorageError,
    SynthesisError,
    ValidationError,
)
from .selection import GenerationParams, SelectionCandidate, SelectionResult, greedy_select
from .store import PaperRecord, SearchHit, VectorStore, cosine_similarity
from .synthesis import Citation, PaperSummary, RelatedWorkResult, finalize

__version__ = "0.1.0"

__all__ = [
    "Citation",
    "EmbeddingUnavailableError",
    "EmptyCorpusError",
    "GenerationParams",
    "PaperRecord",
    "PaperSummary",
    "PipelineError",
    "RefsynthError",
    "RelatedWorkResult",
    "SearchHit",
    "SelectionCandidate",
    "SelectionResult",
    "StorageError",
    "SynthesisError",
    "ValidationError",
    "VectorStore",
    "cosine_similarity",
    "finalize",
    "greedy_select",
    "__version__",
]
