"""Build an in-memory vector store from synthetic records and run searches.

Walks through the lowest layer of the library: embedding a small corpus
with the deterministic hash embedder, inserting records into a flat
store, and running exact cosine top-k queries with topic filtering.
"""

from __future__ import annotations

from datetime import datetime, timezone

from refsynth.embedding import HashEmbedder
from refsynth.store import PaperRecord, VectorStore
from refsynth.sync import SnapshotRecord, canonical_serialize, compute_hash
from refsynth.testing import generate_corpus_records

DIM = 64

embedder = HashEmbedder(dim=DIM)
store = VectorStore(dim=DIM)

records = generate_corpus_records(100, seed=7)
vectors = embedder.embed_texts([r["abstract"] for r in records])
for i, (record, vector) in enumerate(zip(records, vectors)):
    snap = SnapshotRecord(
        paper_id=record["id"],
        title=record["title"],
        authors=list(record["authors"]),
        abstract=record["abstract"],
    )
    store.upsert(
        PaperRecord(
            arxiv_id=snap.paper_id,
            title=snap.title,
            authors=snap.authors,
            abstract=snap.abstract,
            embedding=vector,
            topic_id=i % 4,
            content_hash=compute_hash(canonical_serialize(snap)),
            updated_at=datetime(2024, 1, 1, tzinfo=timezone.utc),
        )
    )

print(f"store holds {store.count()} records of dim {DIM}\n")

query = "robotics estimation and control with simulation benchmarks"
query_vec = embedder.embed_texts([query])[0]

print("top 5 nearest abstracts:")
for hit in store.search(query_vec, k=5):
    print(f"  {hit.arxiv_id}  sim={hit.similarity:.4f}  {store.get(hit.arxiv_id).title}")

print("\nsame query restricted to topic 0:")
for hit in store.search(query_vec, k=5, topic_filter=0):
    print(f"  {hit.arxiv_id}  sim={hit.similarity:.4f}")

# snapshots round-trip byte-identically
store.save("/tmp/demo_store.bin")
reloaded = VectorStore.load("/tmp/demo_store.bin")
print(f"\nreloaded snapshot: {reloaded.count()} records, dim {reloaded.dim}")
