"""Incremental corpus sync: insert, no-change, and update in one pass.

Builds a store from a snapshot, then replays a second snapshot where some
records are unchanged, some mutated, and some new. Only changed or new
texts are re-embedded; the report breaks the work down by kind.
"""

from __future__ import annotations

import io
import json

from refsynth.embedding import HashEmbedder
from refsynth.store import VectorStore
from refsynth.sync import HashIndex, reload
from refsynth.testing import corpus_jsonl_lines, generate_corpus_records

DIM = 32

embedder = HashEmbedder(dim=DIM)
store = VectorStore(dim=DIM)
index = HashIndex()

records = generate_corpus_records(50, seed=3)
first = reload(
    io.StringIO("\n".join(corpus_jsonl_lines(records))),
    store=store,
    index=index,
    embedder=embedder,
    batch_size=16,
)
print("initial load:", json.dumps(first.to_dict()["counts"]))

# mutate 5 abstracts, add 5 new records, keep the rest byte-identical
for record in records[:5]:
    record["abstract"] += " Revised with new experiments."
records.extend(generate_corpus_records(5, seed=9, id_prefix="25"))

second = reload(
    io.StringIO("\n".join(corpus_jsonl_lines(records))),
    store=store,
    index=index,
    embedder=embedder,
    batch_size=16,
)
print("incremental:  ", json.dumps(second.to_dict()["counts"]))
changed = second.counts["Update"] + second.counts["Insert"]
print(f"texts embedded on second pass: {changed} (only Update+Insert)")
print(f"store now holds {store.count()} records")
