"""Incremental corpus synchronization against a metadata snapshot.

Every snapshot record is hashed (SHA-256 over a canonical serialization of
its metadata) and compared against a persisted id -> hash index. Three
cases: matching hash means no action; differing hash means re-embed and
update; unknown id means embed, assign a topic, and insert. Unchanged
records never trigger an embedding call. Records are processed in batches
so Update/Insert embeddings go out as one batch request each.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, TextIO

from .errors import StorageError, ValidationError
from .store import PaperRecord, VectorStore

logger = logging.getLogger(__name__)

INDEX_MAGIC = b"CGHX"
INDEX_VERSION = 1

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

# Pluggable topic model; the default stub assigns no topic.
TopicAssigner = Callable[[str], int]


def no_topic(_abstract: str) -> int:
    return -1


class SyncKind(Enum):
    NO_CHANGE = "NoChange"
    UPDATE = "Update"
    INSERT = "Insert"


@dataclass(frozen=True)
class SyncAction:
    kind: SyncKind
    paper_id: str
    new_hash: bytes


@dataclass
class SyncReport:
    counts: dict[str, int] = field(
        default_factory=lambda: {k.value: 0 for k in SyncKind}
    )
    duration_seconds: float = 0.0
    batch_count: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "duration_seconds": self.duration_seconds,
            "batch_count": self.batch_count,
            "failures": list(self.failures),
            "warnings": list(self.warnings),
        }


@dataclass
class SnapshotRecord:
    """One parsed line of an arXiv-style metadata dump."""

    paper_id: str
    title: str
    authors: list[str]
    abstract: str
    update_date: datetime = _EPOCH

    @classmethod
    def from_json_line(cls, line: str) -> "SnapshotRecord":
        obj = json.loads(line)
        paper_id = obj.get("id") or obj.get("arxiv_id")
        if not paper_id:
            raise ValidationError("record has no id", field="id")
        authors = obj.get("authors", [])
        if isinstance(authors, str):
            authors = [a.strip() for a in authors.split(",") if a.strip()]
        update_date = _EPOCH
        raw_date = obj.get("update_date")
        if raw_date:
            try:
                update_date = datetime.fromisoformat(raw_date).replace(
                    tzinfo=timezone.utc
                )
            except ValueError:
                pass
        return cls(
            paper_id=str(paper_id),
            title=obj.get("title", ""),
            authors=authors,
            abstract=obj.get("abstract", ""),
            update_date=update_date,
        )


def canonical_serialize(record: SnapshotRecord) -> bytes:
    """Byte-stable serialization of a record's metadata.

    Compact UTF-8 JSON with lexicographically sorted keys over the id,
    title, authors, and abstract fields; embeddings and hashes are never
    part of the serialization.
    """
    return json.dumps(
        {
            "abstract": record.abstract,
            "authors": record.authors,
            "id": record.paper_id,
            "title": record.title,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    ).encode("utf-8")


def compute_hash(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


class HashIndex:
    """Persistent id -> content-hash mapping."""

    def __init__(self, entries: dict[str, bytes] | None = None):
        self.entries: dict[str, bytes] = dict(entries or {})

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self.entries

    def get(self, paper_id: str) -> bytes | None:
        return self.entries.get(paper_id)

    def put(self, paper_id: str, digest: bytes) -> None:
        if len(digest) != 32:
            raise ValidationError("hash must be 32 bytes", field="hash")
        self.entries[paper_id] = digest

    def save(self, path) -> None:
        try:
            chunks = [INDEX_MAGIC, struct.pack("<IQ", INDEX_VERSION, len(self.entries))]
            for paper_id in sorted(self.entries):
                raw = paper_id.encode("utf-8")
                chunks.append(struct.pack("<H", len(raw)))
                chunks.append(raw)
                chunks.append(self.entries[paper_id])
            Path(path).write_bytes(b"".join(chunks))
        except OSError as exc:
            raise StorageError(f"failed to write hash index: {exc}") from exc

    @classmethod
    def load(cls, path) -> "HashIndex":
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise StorageError(f"failed to read hash index: {exc}") from exc
        if data[:4] != INDEX_MAGIC:
            raise StorageError("not a hash index file (bad magic)")
        version, count = struct.unpack_from("<IQ", data, 4)
        if version != INDEX_VERSION:
            raise StorageError(f"unsupported index version {version}")
        entries: dict[str, bytes] = {}
        offset = 16
        for _ in range(count):
            (id_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            paper_id = data[offset : offset + id_len].decode("utf-8")
            offset += id_len
            entries[paper_id] = data[offset : offset + 32]
            offset += 32
        return cls(entries)


def classify(record: SnapshotRecord, index: HashIndex) -> SyncAction:
    """Three-case classification against the hash index."""
    digest = compute_hash(canonical_serialize(record))
    stored = index.get(record.paper_id)
    if stored is None:
        kind = SyncKind.INSERT
    elif stored == digest:
        kind = SyncKind.NO_CHANGE
    else:
        kind = SyncKind.UPDATE
    return SyncAction(kind=kind, paper_id=record.paper_id, new_hash=digest)


def apply(
    action: SyncAction,
    record: SnapshotRecord,
    store: VectorStore,
    embedder,
    topic_assigner: TopicAssigner = no_topic,
    embedding=None,
) -> None:
    """Apply one classified action to the store and index-owner state.

    ``embedding`` may carry a pre-computed vector (from batched embedding);
    otherwise the embedder is called for Update/Insert.
    """
    if action.kind is SyncKind.NO_CHANGE:
        return
    if embedding is None:
        embedding = embedder.embed_texts([record.abstract])[0]
    if action.kind is SyncKind.INSERT:
        topic_id = topic_assigner(record.abstract)
    else:
        existing = store.get(record.paper_id)
        topic_id = existing.topic_id if existing is not None else -1
    store.upsert(
        PaperRecord(
            arxiv_id=record.paper_id,
            title=record.title,
            authors=record.authors,
            abstract=record.abstract,
            embedding=embedding,
            topic_id=topic_id,
            content_hash=action.new_hash,
            updated_at=record.update_date,
        )
    )


def _batched(lines: Iterable[str], batch_size: int):
    batch: list[str] = []
    for line in lines:
        batch.append(line)
        if len(batch) == batch_size:
            yield batch
            batch = []
    if batch:
        yield batch


def reload(
    snapshot: Iterable[str] | TextIO,
    store: VectorStore,
    index: HashIndex,
    embedder,
    batch_size: int = 512,
    topic_assigner: TopicAssigner = no_topic,
    dry_run: bool = False,
) -> SyncReport:
    """Stream a one-JSON-per-line snapshot through the three-case sync.

    Per batch: classify every record, embed only Update/Insert abstracts
    (one batched call), apply. Malformed lines are skipped and recorded as
    failures. Duplicate ids within one snapshot: last occurrence wins,
    earlier ones become warnings. ``dry_run`` classifies and counts without
    mutating store or index.
    """
    if batch_size < 1:
        raise ValidationError("batch_size must be >= 1", field="batch_size")
    report = SyncReport()
    started = time.monotonic()
    seen_ids: set[str] = set()
    for batch_lines in _batched(snapshot, batch_size):
        report.batch_count += 1
        records: list[SnapshotRecord] = []
        for line in batch_lines:
            if not line.strip():
                continue
            try:
                records.append(SnapshotRecord.from_json_line(line))
            except (ValidationError, json.JSONDecodeError) as exc:
                report.failures.append(("<unparsed>", str(exc)))
        # Last occurrence of a duplicated id wins within the batch.
        deduped: dict[str, SnapshotRecord] = {}
        for rec in records:
            if rec.paper_id in deduped or rec.paper_id in seen_ids:
                report.warnings.append(f"duplicate id in snapshot: {rec.paper_id}")
            deduped[rec.paper_id] = rec
        seen_ids.update(deduped)

        actions = {pid: classify(rec, index) for pid, rec in deduped.items()}
        to_embed = [
            pid for pid, act in actions.items() if act.kind is not SyncKind.NO_CHANGE
        ]
        embeddings: dict[str, object] = {}
        if to_embed and not dry_run:
            texts = [deduped[pid].abstract for pid in to_embed]
            try:
                vectors = embedder.embed_texts(texts)
                embeddings = dict(zip(to_embed, vectors))
            except Exception as exc:
                for pid in to_embed:
                    report.failures.append((pid, f"embedding failed: {exc}"))
                    del actions[pid]
        for pid, action in actions.items():
            record = deduped[pid]
            if not dry_run:
                try:
                    apply(
                        action,
                        record,
                        store,
                        embedder,
                        topic_assigner,
                        embedding=embeddings.get(pid),
                    )
                    if action.kind is not SyncKind.NO_CHANGE:
                        index.put(pid, action.new_hash)
                except Exception as exc:
                    report.failures.append((pid, str(exc)))
                    continue
            report.counts[action.kind.value] += 1
    report.duration_seconds = time.monotonic() - started
    return report
