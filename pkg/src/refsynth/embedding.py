"""Clients for the text-embedding backend.

Two implementations of the same interface: an HTTP client for a remote
embedding service, and a deterministic hash-seeded embedder used for
hermetic tests and demos. Both return unit-norm float64 vectors, one per
input, order-preserving.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import requests

from .errors import EmbeddingUnavailableError, ValidationError
from .store import normalize

logger = logging.getLogger(__name__)


@dataclass
class EmbedderConfig:
    endpoint_url: str = ""
    model_id: str = "all-mpnet-base-v2"
    dim: int = 768
    max_input_tokens: int = 384
    batch_size: int = 32
    timeout: float = 30.0
    retries: int = 2

    def __post_init__(self):
        if self.dim <= 0:
            raise ValidationError("dim must be positive", field="dim")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1", field="batch_size")


class Embedder(Protocol):
    dim: int

    def embed_texts(self, texts: list[str]) -> list[np.ndarray]: ...


def truncate_words(text: str, max_words: int) -> str:
    """Cut ``text`` to at most ``max_words`` whitespace-delimited words.

    Never splits a word; texts already within the limit pass through
    unchanged (including their original whitespace).
    """
    words = text.split()
    if len(words) <= max_words:
        return text
    return " ".join(words[:max_words])


def _check_inputs(texts: list[str]) -> None:
    if not texts:
        raise ValidationError("texts must be non-empty", field="texts")
    for i, t in enumerate(texts):
        if not t.strip():
            raise ValidationError(f"text at index {i} is empty", field="texts")


class HashEmbedder:
    """Deterministic embedder for hermetic tests.

    Each text's vector is drawn from a PRNG seeded with a stable 64-bit
    hash of the (truncated) text, then normalized. Identical text always
    maps to the identical vector, across processes and platforms.
    """

    def __init__(self, dim: int = 768, max_input_tokens: int = 384):
        self.dim = dim
        self.max_input_tokens = max_input_tokens

    def embed_texts(self, texts: list[str]) -> list[np.ndarray]:
        _check_inputs(texts)
        out = []
        for text in texts:
            text = truncate_words(text, self.max_input_tokens)
            seed = int.from_bytes(
                hashlib.sha256(text.encode("utf-8")).digest()[:8], "big"
            )
            rng = np.random.default_rng(seed)
            out.append(normalize(rng.standard_normal(self.dim)))
        return out


class HttpEmbedder:
    """Client for a remote embedding service.

    Wire contract: POST ``endpoint_url`` with ``{"model": ..., "inputs":
    [...]}``; response ``{"vectors": [[...], ...]}``. Requests are batched
    per config; retries apply per batch.
    """

    def __init__(self, config: EmbedderConfig, session: requests.Session | None = None):
        self.config = config
        self.dim = config.dim
        self._session = session or requests.Session()

    def embed_texts(self, texts: list[str]) -> list[np.ndarray]:
        _check_inputs(texts)
        cfg = self.config
        prepared = [truncate_words(t, cfg.max_input_tokens) for t in texts]
        out: list[np.ndarray] = []
        for start in range(0, len(prepared), cfg.batch_size):
            batch = prepared[start : start + cfg.batch_size]
            vectors = self._embed_batch(batch, start)
            out.extend(vectors)
        return out

    def _embed_batch(self, batch: list[str], start: int) -> list[np.ndarray]:
        cfg = self.config
        last_error: Exception | None = None
        for attempt in range(cfg.retries + 1):
            try:
                resp = self._session.post(
                    cfg.endpoint_url,
                    json={"model": cfg.model_id, "inputs": batch},
                    timeout=cfg.timeout,
                )
                resp.raise_for_status()
                vectors = resp.json()["vectors"]
                if len(vectors) != len(batch):
                    raise EmbeddingUnavailableError(
                        "embedding service returned wrong vector count",
                        failed_indices=list(range(start, start + len(batch))),
                    )
                return [normalize(v, cfg.dim) for v in vectors]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < cfg.retries:
                    time.sleep(min(2.0**attempt * 0.5, 10.0))
        logger.warning("embedding batch failed after retries: %s", last_error)
        raise EmbeddingUnavailableError(
            f"embedding service unavailable: {last_error}",
            failed_indices=list(range(start, start + len(batch))),
        )
