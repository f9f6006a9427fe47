"""In-process vector + metadata store with exact cosine top-k search.

Embeddings are unit-normalized on ingest, so cosine similarity reduces to a
dot product. Search is an exact full scan over a cached embedding matrix;
that keeps oracle tests meaningful and is fast enough for corpora well past
10^5 records. Writes are serialized by a lock; readers always see either the
pre- or post-write state, never a torn one.
"""

from __future__ import annotations

import io
import json
import struct
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .errors import StorageError, ValidationError

SNAPSHOT_MAGIC = b"CGST"
SNAPSHOT_VERSION = 1

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def normalize(values, dim: int | None = None) -> np.ndarray:
    """Return ``values`` as a unit-norm float64 vector.

    Raises ValidationError on NaN/inf components, a zero vector, or a
    dimension mismatch against ``dim``.
    """
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise ValidationError("embedding must be a 1-D vector", field="embedding")
    if dim is not None and vec.shape[0] != dim:
        raise ValidationError(
            f"embedding dimension {vec.shape[0]} does not match store dimension {dim}",
            field="embedding",
        )
    if not np.all(np.isfinite(vec)):
        raise ValidationError("embedding contains NaN or infinite components", field="embedding")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValidationError("embedding has zero norm", field="embedding")
    return vec / norm


def cosine_similarity(a, b) -> float:
    """Dot product of two unit-norm vectors of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError("dimension mismatch in cosine_similarity", field="embedding")
    return float(np.dot(a, b))


@dataclass
class PaperRecord:
    arxiv_id: str
    title: str
    authors: list[str]
    abstract: str
    embedding: np.ndarray
    topic_id: int = -1
    content_hash: bytes = b""
    updated_at: datetime = _EPOCH

    def validate(self, dim: int) -> None:
        if not self.arxiv_id:
            raise ValidationError("arxiv_id must be non-empty", field="arxiv_id")
        if len(self.content_hash) not in (0, 32):
            raise ValidationError("content_hash must be a 32-byte digest", field="content_hash")
        normalize(self.embedding, dim)


@dataclass(frozen=True)
class SearchHit:
    arxiv_id: str
    similarity: float


class VectorStore:
    """Exact (flat) cosine index over PaperRecords, keyed by arXiv ID.

    Thread-safe: reads may run concurrently; upsert/delete are serialized.
    """

    def __init__(self, dim: int = 768):
        if dim <= 0:
            raise ValidationError("dim must be positive", field="dim")
        self.dim = dim
        self._records: dict[str, PaperRecord] = {}
        self._lock = threading.RLock()
        self._matrix: np.ndarray | None = None
        self._matrix_ids: list[str] = []

    # -- mutation ---------------------------------------------------------

    def upsert(self, record: PaperRecord) -> None:
        record.validate(self.dim)
        stored = replace(record, embedding=normalize(record.embedding, self.dim))
        with self._lock:
            self._records[stored.arxiv_id] = stored
            self._matrix = None

    def delete(self, arxiv_id: str) -> None:
        with self._lock:
            if self._records.pop(arxiv_id, None) is not None:
                self._matrix = None

    # -- lookup -----------------------------------------------------------

    def get(self, arxiv_id: str) -> PaperRecord | None:
        with self._lock:
            return self._records.get(arxiv_id)

    def count(self) -> int:
        with self._lock:
            return len(self._records)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._records)

    def search(
        self, query, k: int, topic_filter: int | None = None
    ) -> list[SearchHit]:
        """Exact top-k by cosine similarity, ties broken by ascending ID."""
        if k < 1:
            raise ValidationError("k must be >= 1", field="k")
        q = normalize(query, self.dim)
        with self._lock:
            if not self._records:
                return []
            matrix, ids = self._embedding_matrix()
            records = self._records
            if topic_filter is not None:
                mask = np.array(
                    [records[i].topic_id == topic_filter for i in ids], dtype=bool
                )
                if not mask.any():
                    return []
                matrix = matrix[mask]
                ids = [i for i, keep in zip(ids, mask) if keep]
        sims = matrix @ q
        order = sorted(range(len(ids)), key=lambda i: (-sims[i], ids[i]))[:k]
        return [SearchHit(ids[i], float(sims[i])) for i in order]

    def _embedding_matrix(self) -> tuple[np.ndarray, list[str]]:
        # caller holds the lock
        if self._matrix is None:
            self._matrix_ids = sorted(self._records)
            if self._matrix_ids:
                self._matrix = np.stack(
                    [self._records[i].embedding for i in self._matrix_ids]
                )
            else:
                self._matrix = np.empty((0, self.dim))
        return self._matrix, self._matrix_ids

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        """Write a single-file snapshot. Records are sorted by ID, so equal
        store contents produce byte-identical files."""
        try:
            with self._lock:
                ids = sorted(self._records)
                buf = io.BytesIO()
                buf.write(SNAPSHOT_MAGIC)
                buf.write(struct.pack("<IIQ", SNAPSHOT_VERSION, self.dim, len(ids)))
                for arxiv_id in ids:
                    r = self._records[arxiv_id]
                    meta = json.dumps(
                        {
                            "arxiv_id": r.arxiv_id,
                            "title": r.title,
                            "authors": r.authors,
                            "abstract": r.abstract,
                            "topic_id": r.topic_id,
                            "content_hash": r.content_hash.hex(),
                            "updated_at": r.updated_at.isoformat(),
                        },
                        sort_keys=True,
                        separators=(",", ":"),
                        ensure_ascii=False,
                    ).encode("utf-8")
                    buf.write(struct.pack("<I", len(meta)))
                    buf.write(meta)
                    buf.write(r.embedding.astype("<f8").tobytes())
            with open(path, "wb") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise StorageError(f"failed to write snapshot: {exc}") from exc

    @classmethod
    def load(cls, path) -> "VectorStore":
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise StorageError(f"failed to read snapshot: {exc}") from exc
        if data[:4] != SNAPSHOT_MAGIC:
            raise StorageError("not a store snapshot (bad magic)")
        version, dim, count = struct.unpack_from("<IIQ", data, 4)
        if version != SNAPSHOT_VERSION:
            raise StorageError(f"unsupported snapshot version {version}")
        store = cls(dim=dim)
        offset = 4 + 16
        for _ in range(count):
            (meta_len,) = struct.unpack_from("<I", data, offset)
            offset += 4
            meta = json.loads(data[offset : offset + meta_len].decode("utf-8"))
            offset += meta_len
            emb = np.frombuffer(data, dtype="<f8", count=dim, offset=offset).copy()
            offset += dim * 8
            record = PaperRecord(
                arxiv_id=meta["arxiv_id"],
                title=meta["title"],
                authors=meta["authors"],
                abstract=meta["abstract"],
                embedding=emb,
                topic_id=meta["topic_id"],
                content_hash=bytes.fromhex(meta["content_hash"]),
                updated_at=datetime.fromisoformat(meta["updated_at"]),
            )
            store._records[record.arxiv_id] = record
        return store
