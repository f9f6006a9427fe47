import numpy as np
import pytest

from refsynth.embedding import HashEmbedder
from refsynth.store import PaperRecord, VectorStore
from refsynth.sync import SnapshotRecord, canonical_serialize, compute_hash

from datetime import datetime, timezone


def unit(values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    return vec / np.linalg.norm(vec)


def random_unit(rng, dim) -> np.ndarray:
    return unit(rng.standard_normal(dim))


def make_record(arxiv_id, embedding, abstract="An abstract.", topic_id=-1):
    snap = SnapshotRecord(
        paper_id=arxiv_id,
        title=f"Title {arxiv_id}",
        authors=["A. Author"],
        abstract=abstract,
    )
    return PaperRecord(
        arxiv_id=arxiv_id,
        title=snap.title,
        authors=snap.authors,
        abstract=abstract,
        embedding=embedding,
        topic_id=topic_id,
        content_hash=compute_hash(canonical_serialize(snap)),
        updated_at=datetime(2024, 1, 1, tzinfo=timezone.utc),
    )


@pytest.fixture
def embedder():
    return HashEmbedder(dim=64)


@pytest.fixture
def small_store():
    rng = np.random.default_rng(0)
    store = VectorStore(dim=8)
    for i in range(20):
        store.upsert(make_record(f"2401.{10000 + i}", random_unit(rng, 8)))
    return store
