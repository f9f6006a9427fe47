"""Full-text fetching, cleaning, page scoring, and shortlist construction.

Longlisted candidates have their full papers fetched and split into pages.
Pages are cleaned (reference/appendix sections cut, inline citation markers
stripped), embedded, scored against the input abstract, and the depth-k most
relevant pages per paper are kept via the same diversity-weighted greedy
rule used for candidate selection. Candidates whose fetch or extraction
fails are dropped with a warning, never aborting the job.
"""

from __future__ import annotations

import logging
import math
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import numpy as np
import requests

from .errors import PipelineError, ValidationError
from .selection import GenerationParams, SelectionCandidate, SelectionResult, greedy_select
from .store import cosine_similarity, normalize

logger = logging.getLogger(__name__)

# An isolated section heading after which nothing is summarization-worthy.
_CUT_HEADING_RE = re.compile(
    r"^\s*(?:[\divxIVX]+\.?\s*)?(references|bibliography|appendix|acknowledge?ments)\s*[:.]?\s*$",
    re.IGNORECASE,
)
# Inline bracketed numeric citation markers: [12], [3, 4], ...
_CITATION_MARKER_RE = re.compile(r"\[\d+(,\s*\d+)*\]")
_WS_RE = re.compile(r"\s+")

DEFAULT_BLOCK_WORDS = 350


@dataclass
class FetchedDocument:
    arxiv_id: str
    pages: list[str]  # cleaned, non-empty page texts
    raw_page_count: int

    @property
    def usable(self) -> bool:
        return bool(self.pages)


@dataclass
class ScoredPage:
    page_index: int
    text: str
    embedding: np.ndarray
    similarity: float


@dataclass
class ShortlistEntry:
    arxiv_id: str
    abstract: str
    selected_pages: list[ScoredPage]
    mean_page_similarity: float


def clean_text(page: str, cut_reached: bool = False) -> str:
    """Clean one page of extracted text.

    Removes inline numeric citation markers, cuts everything from the first
    isolated references/bibliography/appendix/acknowledgments heading
    onward, and collapses whitespace runs to single spaces. When
    ``cut_reached`` is true (a heading was hit on an earlier page of the
    same document) the whole page is dropped.
    """
    text, _ = clean_text_with_state(page, cut_reached)
    return text


def _clean_pass(page: str) -> tuple[str, bool]:
    kept_lines: list[str] = []
    cut = False
    for line in page.splitlines():
        line = _CITATION_MARKER_RE.sub("", line)
        if _CUT_HEADING_RE.match(line):
            cut = True
            break
        kept_lines.append(line)
    joined = " ".join(kept_lines)
    # markers can span the line breaks just joined away
    joined = _CITATION_MARKER_RE.sub("", joined)
    return _WS_RE.sub(" ", joined).strip(), cut


def clean_text_with_state(page: str, cut_reached: bool = False) -> tuple[str, bool]:
    """As clean_text, but also report whether a cut heading was reached.

    Runs passes to a fixpoint: whitespace collapse can rejoin marker or
    heading fragments that were split across lines, so a single pass is not
    idempotent. Each changing pass strictly shortens the text.
    """
    if cut_reached:
        return "", True
    text = page
    while True:
        new, cut = _clean_pass(text)
        cut_reached = cut_reached or cut
        if new == text:
            return new, cut_reached
        text = new


def clean_pages(pages: list[str]) -> list[str]:
    """Clean a whole document; the heading cut persists across pages.

    Pages that clean to empty are excluded from the result.
    """
    out: list[str] = []
    cut = False
    for page in pages:
        cleaned, cut = clean_text_with_state(page, cut)
        if cleaned:
            out.append(cleaned)
        if cut:
            break
    return out


def split_into_blocks(text: str, block_words: int = DEFAULT_BLOCK_WORDS) -> list[str]:
    """Fallback paging for documents without page boundaries."""
    words = text.split()
    return [
        " ".join(words[i : i + block_words]) for i in range(0, len(words), block_words)
    ]


# -- fetching ---------------------------------------------------------------


class Fetcher(Protocol):
    def fetch_pages(self, arxiv_id: str) -> list[str]:
        """Raw (pre-cleaning) page texts for the given paper."""
        ...


Extractor = Callable[[bytes], list[str]]


def text_extractor(data: bytes) -> list[str]:
    """Default extractor: UTF-8 text, pages split on form feeds.

    Documents without form feeds are split into ~350-word blocks to align
    with the embedder window. Binary PDFs require an extractor backed by a
    PDF library (see ``pdf_extractor``).
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"document is not decodable text: {exc}") from exc
    if "\f" in text:
        pages = [p for p in text.split("\f") if p.strip()]
    else:
        pages = split_into_blocks(text)
    if not pages:
        raise ValidationError("document contains no text")
    return pages


def pdf_extractor(data: bytes) -> list[str]:
    """PDF extractor backed by pypdf, if installed."""
    try:
        from pypdf import PdfReader
    except ImportError as exc:
        raise ValidationError("PDF support requires the pypdf package") from exc
    import io

    reader = PdfReader(io.BytesIO(data))
    pages = [page.extract_text() or "" for page in reader.pages]
    pages = [p for p in pages if p.strip()]
    if not pages:
        raise ValidationError("no extractable text in PDF")
    return pages


def extract_document(data: bytes) -> list[str]:
    """Pick an extractor from the document's leading bytes."""
    if not data:
        raise ValidationError("empty document")
    if data[:5] == b"%PDF-":
        return pdf_extractor(data)
    return text_extractor(data)


class ArxivFetcher:
    """Downloads full papers from arXiv export endpoints.

    Applies a per-request politeness delay and caches extracted page sets
    on disk under ``cache/<arxiv_id>/<version>.txt`` (length-prefixed
    pages) so reruns cost nothing.
    """

    def __init__(
        self,
        cache_dir: str | Path = "cache",
        delay_seconds: float = 3.0,
        extractor: Extractor = extract_document,
        session: requests.Session | None = None,
        timeout: float = 60.0,
    ):
        self.cache_dir = Path(cache_dir)
        self.delay_seconds = delay_seconds
        self.extractor = extractor
        self.timeout = timeout
        self._session = session or requests.Session()
        self._last_request = 0.0

    def fetch_pages(self, arxiv_id: str, version: str = "latest") -> list[str]:
        cached = self._read_cache(arxiv_id, version)
        if cached is not None:
            return cached
        wait = self.delay_seconds - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        url = f"https://export.arxiv.org/pdf/{arxiv_id}"
        resp = self._session.get(url, timeout=self.timeout)
        self._last_request = time.monotonic()
        resp.raise_for_status()
        pages = self.extractor(resp.content)
        self._write_cache(arxiv_id, version, pages)
        return pages

    def _cache_path(self, arxiv_id: str, version: str) -> Path:
        safe_id = arxiv_id.replace("/", "_")
        return self.cache_dir / safe_id / f"{version}.txt"

    def _read_cache(self, arxiv_id: str, version: str) -> list[str] | None:
        path = self._cache_path(arxiv_id, version)
        if not path.exists():
            return None
        data = path.read_bytes()
        pages = []
        offset = 0
        while offset < len(data):
            newline = data.index(b"\n", offset)
            length = int(data[offset:newline])
            offset = newline + 1
            pages.append(data[offset : offset + length].decode("utf-8"))
            offset += length
        return pages

    def _write_cache(self, arxiv_id: str, version: str, pages: list[str]) -> None:
        path = self._cache_path(arxiv_id, version)
        path.parent.mkdir(parents=True, exist_ok=True)
        chunks = []
        for page in pages:
            raw = page.encode("utf-8")
            chunks.append(str(len(raw)).encode("ascii") + b"\n" + raw)
        path.write_bytes(b"".join(chunks))


def fetch_fulltext(arxiv_id: str, fetcher: Fetcher) -> FetchedDocument | None:
    """Fetch and clean one paper; returns None when the candidate must be
    dropped (fetch or extraction failure, or nothing left after cleaning)."""
    try:
        raw_pages = fetcher.fetch_pages(arxiv_id)
    except Exception as exc:
        logger.warning("dropping %s: fetch failed (%s)", arxiv_id, exc)
        return None
    pages = clean_pages(raw_pages)
    doc = FetchedDocument(arxiv_id=arxiv_id, pages=pages, raw_page_count=len(raw_pages))
    if not doc.usable:
        logger.warning("dropping %s: no usable text after cleaning", arxiv_id)
        return None
    return doc


# -- scoring and shortlisting -------------------------------------------------


def score_pages(doc: FetchedDocument, query, embedder) -> list[ScoredPage]:
    """Embed every cleaned page and score it against the query embedding."""
    if not doc.pages:
        raise ValidationError("document has no usable pages")
    vectors = embedder.embed_texts(doc.pages)
    return [
        ScoredPage(
            page_index=i,
            text=text,
            embedding=vec,
            similarity=cosine_similarity(vec, query),
        )
        for i, (text, vec) in enumerate(zip(doc.pages, vectors))
    ]


def select_pages(scored: list[ScoredPage], depth: int, w: float) -> list[ScoredPage]:
    """Keep the depth-k representative pages via the greedy selection rule."""
    if not scored:
        raise ValidationError("no scored pages to select from")
    by_index = {p.page_index: p for p in scored}
    pool = [
        SelectionCandidate(
            id=f"{p.page_index:06d}", embedding=p.embedding, query_similarity=p.similarity
        )
        for p in scored
    ]
    n = min(depth, len(pool))
    result = greedy_select(pool, n, w)
    return [by_index[int(c.id)] for c in result.selected]


def build_shortlist(
    candidates: list[tuple[str, str, list[ScoredPage]]],
    params: GenerationParams,
    shortlist_cap: int = 12,
    keep_fraction: float = 0.7,
) -> list[ShortlistEntry]:
    """Rank surviving candidates by mean selected-page similarity.

    ``candidates`` holds (arxiv_id, abstract, selected_pages) for every
    longlist member that survived fetching. Keeps the top
    min(ceil(keep_fraction * survivors), shortlist_cap) entries; ties in the
    mean break by ascending id.
    """
    if not candidates:
        raise PipelineError("no usable sources: every candidate was dropped")
    entries = []
    for arxiv_id, abstract, pages in candidates:
        mean = float(np.mean([p.similarity for p in pages]))
        entries.append(
            ShortlistEntry(
                arxiv_id=arxiv_id,
                abstract=abstract,
                selected_pages=pages,
                mean_page_similarity=mean,
            )
        )
    entries.sort(key=lambda e: (-e.mean_page_similarity, e.arxiv_id))
    m = min(math.ceil(keep_fraction * len(entries)), shortlist_cap)
    return entries[:m]


def match_full_paper(
    input_pages: list[str],
    params: GenerationParams,
    store,
    embedder,
    pool_factor: int = 5,
) -> SelectionResult:
    """Candidate selection for a full-paper input.

    Embeds every cleaned input page, searches the store per page, sums each
    candidate's similarities across all page queries (absent hits count 0),
    min-max normalizes the aggregate onto [0, 1], and hands the top
    pool_factor x breadth candidates to the greedy selection rule.
    """
    params.validate()
    cleaned = [p for p in (clean_text(page) for page in input_pages) if p]
    if not cleaned:
        raise ValidationError("input document has no usable text")
    vectors = embedder.embed_texts(cleaned)
    pool_size = pool_factor * params.breadth
    aggregate: dict[str, float] = {}
    for vec in vectors:
        for hit in store.search(vec, pool_size):
            aggregate[hit.arxiv_id] = aggregate.get(hit.arxiv_id, 0.0) + hit.similarity
    if not aggregate:
        raise PipelineError("no candidates retrieved for the input document")
    ranked = sorted(aggregate.items(), key=lambda kv: (-kv[1], kv[0]))[:pool_size]
    scores = [s for _, s in ranked]
    lo, hi = min(scores), max(scores)
    span = hi - lo
    pool = [
        SelectionCandidate(
            id=arxiv_id,
            embedding=store.get(arxiv_id).embedding,
            query_similarity=(score - lo) / span if span > 0 else 1.0,
        )
        for arxiv_id, score in ranked
    ]
    n = min(params.breadth, len(pool))
    result = greedy_select(pool, n, params.diversity)
    result.pool_exhausted = len(pool) < params.breadth
    return result
