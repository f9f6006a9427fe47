import math

import numpy as np
import pytest

from refsynth.embedding import (
    EmbedderConfig,
    HashEmbedder,
    HttpEmbedder,
    truncate_words,
)
from refsynth.errors import EmbeddingUnavailableError, ValidationError


def test_mock_deterministic():
    emb = HashEmbedder(dim=32)
    a = emb.embed_texts(["a"])[0]
    b = emb.embed_texts(["a"])[0]
    assert np.array_equal(a, b)


def test_batch_consistency():
    emb = HashEmbedder(dim=32)
    t1, t2 = "first text", "second text"
    batched = emb.embed_texts([t1, t2])
    singles = [emb.embed_texts([t1])[0], emb.embed_texts([t2])[0]]
    assert np.array_equal(batched[0], singles[0])
    assert np.array_equal(batched[1], singles[1])


def test_unit_norm_by_independent_summation():
    emb = HashEmbedder(dim=48)
    for text in ["alpha", "beta gamma", "x" * 100]:
        vec = emb.embed_texts([text])[0]
        norm = math.sqrt(sum(float(x) * float(x) for x in vec))
        assert abs(norm - 1.0) < 1e-6


def test_order_preservation():
    emb = HashEmbedder(dim=16)
    texts = [f"text number {i}" for i in range(10)]
    out = emb.embed_texts(texts)
    for i, text in enumerate(texts):
        assert np.array_equal(out[i], emb.embed_texts([text])[0])


def test_empty_inputs_rejected():
    emb = HashEmbedder(dim=16)
    with pytest.raises(ValidationError):
        emb.embed_texts([])
    with pytest.raises(ValidationError):
        emb.embed_texts(["ok", "   "])


def test_truncation_word_boundary():
    text = "one two three four five"
    assert truncate_words(text, 3) == "one two three"
    assert truncate_words(text, 5) == text  # identity within limits
    assert truncate_words(text, 50) == text


def test_truncation_affects_embedding():
    emb = HashEmbedder(dim=16, max_input_tokens=3)
    long = "one two three four five"
    assert np.array_equal(
        emb.embed_texts([long])[0], emb.embed_texts(["one two three"])[0]
    )


class _FakeResponse:
    def __init__(self, vectors):
        self._vectors = vectors

    def raise_for_status(self):
        pass

    def json(self):
        return {"vectors": self._vectors}


class _FakeSession:
    def __init__(self, dim, fail_times=0):
        self.dim = dim
        self.fail_times = fail_times
        self.requests = []

    def post(self, url, json=None, timeout=None):
        self.requests.append(json)
        if self.fail_times > 0:
            self.fail_times -= 1
            import requests

            raise requests.ConnectionError("boom")
        rng = np.random.default_rng(0)
        return _FakeResponse([list(rng.standard_normal(self.dim)) for _ in json["inputs"]])


def test_http_embedder_batching_and_normalization():
    cfg = EmbedderConfig(endpoint_url="http://x", dim=8, batch_size=2, retries=0)
    session = _FakeSession(dim=8)
    emb = HttpEmbedder(cfg, session=session)
    out = emb.embed_texts(["a", "b", "c"])
    assert len(out) == 3
    assert len(session.requests) == 2  # two batches: [a, b], [c]
    for vec in out:
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-9


def test_http_embedder_retries_then_fails():
    cfg = EmbedderConfig(endpoint_url="http://x", dim=8, batch_size=4, retries=1)
    session = _FakeSession(dim=8, fail_times=5)
    emb = HttpEmbedder(cfg, session=session)
    with pytest.raises(EmbeddingUnavailableError) as exc_info:
        emb.embed_texts(["a", "b"])
    assert exc_info.value.failed_indices == [0, 1]
    assert len(session.requests) == 2  # initial try + 1 retry


def test_http_embedder_recovers_within_retries():
    cfg = EmbedderConfig(endpoint_url="http://x", dim=8, batch_size=4, retries=2)
    session = _FakeSession(dim=8, fail_times=1)
    emb = HttpEmbedder(cfg, session=session)
    assert len(emb.embed_texts(["a"])) == 1


def test_config_validation():
    with pytest.raises(ValidationError):
        EmbedderConfig(dim=0)
    with pytest.raises(ValidationError):
        EmbedderConfig(batch_size=0)
