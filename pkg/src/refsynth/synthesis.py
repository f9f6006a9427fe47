"""LLM orchestration: per-paper summaries, section synthesis, and
citation-grounded finalization.

Sources travel through prompts under a canonical citation token
``[@arxiv:<id>]``. Finalization replaces tokens whose id is shortlisted
with sequential keys ("[1]", "[2]", ...) and strips everything else, so a
result can never cite a paper the pipeline did not retrieve.
"""

from __future__ import annotations

import logging
import re
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol

import requests

from .errors import SynthesisError, ValidationError
from .fulltext import ShortlistEntry
from .selection import GenerationParams

logger = logging.getLogger(__name__)

CITATION_TOKEN_RE = re.compile(r"\[@arxiv:([A-Za-z0-9.\-/]+)\]")

# arXiv identifiers: modern "2401.01234" (optional version) or legacy
# "cs/0101001" style.
ARXIV_ID_RE = re.compile(
    r"^(\d{4}\.\d{4,5}(v\d+)?|[a-z][a-z-]*(\.[A-Z]{2})?/\d{7}(v\d+)?)$"
)

TEMPLATE_VERSION = "v1"


def load_template(name: str) -> str:
    return (
        resources.files("refsynth.templates").joinpath(f"{name}.txt").read_text("utf-8")
    )


def estimate_tokens(text: str) -> int:
    """Cheap context-budget proxy: whitespace word count x 1.5."""
    return int(len(text.split()) * 1.5)


@dataclass
class LlmConfig:
    endpoint_url: str = ""
    model_id: str = "gpt-4o"
    max_context_tokens: int = 120_000
    temperature: float = 0.0
    timeout: float = 120.0
    retries: int = 2


class LlmClient(Protocol):
    def complete(self, prompt: str, config: LlmConfig) -> str: ...


class HttpLlm:
    """Minimal JSON-over-HTTP completion client.

    Request: ``{"model", "prompt", "temperature", "max_tokens"}``;
    response: ``{"text": ...}``.
    """

    def __init__(self, session: requests.Session | None = None):
        self._session = session or requests.Session()

    def complete(self, prompt: str, config: LlmConfig) -> str:
        last_error: Exception | None = None
        for attempt in range(config.retries + 1):
            try:
                resp = self._session.post(
                    config.endpoint_url,
                    json={
                        "model": config.model_id,
                        "prompt": prompt,
                        "temperature": config.temperature,
                        "max_tokens": 4096,
                    },
                    timeout=config.timeout,
                )
                resp.raise_for_status()
                return resp.json()["text"]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < config.retries:
                    time.sleep(min(2.0**attempt, 10.0))
        raise SynthesisError(f"LLM service unavailable: {last_error}")


@dataclass
class PaperSummary:
    arxiv_id: str
    summary_text: str
    source_pages_used: list[int]


@dataclass
class Citation:
    key: str
    arxiv_id: str
    title: str
    authors: list[str]
    year: int
    url: str


@dataclass
class RelatedWorkResult:
    body: str
    citations: list[Citation]
    params_used: GenerationParams
    shortlist_ids: list[str]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "body": self.body,
            "citations": [
                {
                    "key": c.key,
                    "arxiv_id": c.arxiv_id,
                    "title": c.title,
                    "authors": c.authors,
                    "year": c.year,
                    "url": c.url,
                }
                for c in self.citations
            ],
            "params_used": {
                "breadth": self.params_used.breadth,
                "depth": self.params_used.depth,
                "diversity": self.params_used.diversity,
            },
            "shortlist_ids": list(self.shortlist_ids),
            "warnings": list(self.warnings),
        }


def arxiv_url(arxiv_id: str) -> str:
    return f"https://arxiv.org/abs/{arxiv_id}"


# -- summarization ------------------------------------------------------------


def build_summary_prompt(
    input_abstract: str, entry: ShortlistEntry, max_context_tokens: int
) -> tuple[str, list[int]]:
    """Assemble the per-paper summary prompt within the context budget.

    When the assembled prompt exceeds the budget, pages are dropped
    lowest-similarity-first until it fits.
    """
    template = load_template("summarize")
    pages = sorted(entry.selected_pages, key=lambda p: -p.similarity)
    while True:
        pages_text = "\n\n".join(
            f"[page {p.page_index + 1}]\n{p.text}" for p in pages
        )
        prompt = template.format(
            input_abstract=input_abstract,
            paper_abstract=entry.abstract,
            pages=pages_text or "(no page excerpts available)",
        )
        if estimate_tokens(prompt) <= max_context_tokens or not pages:
            return prompt, sorted(p.page_index for p in pages)
        pages = pages[:-1]  # drop the lowest-similarity page


def summarize_paper(
    input_abstract: str, entry: ShortlistEntry, llm: LlmClient, config: LlmConfig
) -> PaperSummary | None:
    """Summarize one shortlisted paper, tailored to the input abstract.

    Returns None when the entry must be dropped (transport failure or
    persistently empty model output).
    """
    prompt, pages_used = build_summary_prompt(
        input_abstract, entry, config.max_context_tokens
    )
    for attempt in range(2):
        try:
            text = llm.complete(prompt, config)
        except SynthesisError as exc:
            logger.warning("dropping %s: summarization failed (%s)", entry.arxiv_id, exc)
            return None
        if text.strip():
            return PaperSummary(
                arxiv_id=entry.arxiv_id,
                summary_text=text.strip(),
                source_pages_used=pages_used,
            )
        logger.warning("empty summary for %s (attempt %d)", entry.arxiv_id, attempt + 1)
    return None


# -- synthesis ----------------------------------------------------------------


def build_synthesis_prompt(
    input_abstract: str,
    summaries: list[PaperSummary],
    mode: str = "related-work",
    question: str | None = None,
    max_context_tokens: int | None = None,
) -> str:
    if not summaries:
        raise ValidationError("at least one summary is required", field="summaries")
    if mode not in ("related-work", "question-answer"):
        raise ValidationError(f"unknown mode {mode!r}", field="mode")
    if mode == "question-answer" and not (question and question.strip()):
        raise ValidationError("question must be non-empty in QA mode", field="question")

    summaries = list(summaries)
    while True:
        block = "\n\n".join(
            f"[@arxiv:{s.arxiv_id}]\n{s.summary_text}" for s in summaries
        )
        if mode == "question-answer":
            prompt = load_template("synthesize_question").format(
                question=question, input_abstract=input_abstract, summaries=block
            )
        else:
            prompt = load_template("synthesize_related_work").format(
                input_abstract=input_abstract, summaries=block
            )
        if (
            max_context_tokens is None
            or estimate_tokens(prompt) <= max_context_tokens
            or len(summaries) <= 1
        ):
            return prompt
        # Context overflow: truncate the oldest (first-listed) summary text;
        # if already truncated, drop it.
        first = summaries[0]
        words = first.summary_text.split()
        if len(words) > 60:
            summaries[0] = PaperSummary(
                first.arxiv_id, " ".join(words[: len(words) // 2]), first.source_pages_used
            )
        else:
            summaries = summaries[1:]


def synthesize(
    input_abstract: str,
    summaries: list[PaperSummary],
    llm: LlmClient,
    config: LlmConfig,
    mode: str = "related-work",
    question: str | None = None,
) -> str:
    """Produce the raw draft (with citation tokens) from the summaries."""
    prompt = build_synthesis_prompt(
        input_abstract,
        summaries,
        mode=mode,
        question=question,
        max_context_tokens=config.max_context_tokens,
    )
    return llm.complete(prompt, config)


# -- citation metadata --------------------------------------------------------


@dataclass
class CitationMeta:
    title: str
    authors: list[str]
    year: int
    warning: str | None = None


_ATOM_NS = {"atom": "http://www.w3.org/2005/Atom"}


def _parse_arxiv_atom(xml_text: str) -> CitationMeta | None:
    root = ET.fromstring(xml_text)
    entry = root.find("atom:entry", _ATOM_NS)
    if entry is None:
        return None
    title = (entry.findtext("atom:title", "", _ATOM_NS) or "").strip()
    authors = [
        (a.findtext("atom:name", "", _ATOM_NS) or "").strip()
        for a in entry.findall("atom:author", _ATOM_NS)
    ]
    published = entry.findtext("atom:published", "", _ATOM_NS) or ""
    year = int(published[:4]) if published[:4].isdigit() else 0
    if not title:
        return None
    return CitationMeta(title=title, authors=authors, year=year)


def fetch_citation_metadata(
    arxiv_id: str,
    store=None,
    session: requests.Session | None = None,
    remote: bool = True,
    timeout: float = 30.0,
) -> CitationMeta:
    """Title/authors/year for a citation, remote-first with store fallback."""
    if not ARXIV_ID_RE.match(arxiv_id):
        raise ValidationError(f"malformed arXiv id: {arxiv_id!r}", field="arxiv_id")
    if remote:
        try:
            sess = session or requests.Session()
            resp = sess.get(
                "https://export.arxiv.org/api/query",
                params={"id_list": arxiv_id},
                timeout=timeout,
            )
            resp.raise_for_status()
            meta = _parse_arxiv_atom(resp.text)
            if meta is not None:
                return meta
        except (requests.RequestException, ET.ParseError) as exc:
            logger.warning("arXiv metadata lookup failed for %s: %s", arxiv_id, exc)
    if store is not None:
        record = store.get(arxiv_id)
        if record is not None:
            warning = (
                f"citation metadata for {arxiv_id} taken from local corpus"
                if remote
                else None
            )
            return CitationMeta(
                title=record.title,
                authors=record.authors,
                year=record.updated_at.year,
                warning=warning,
            )
    return CitationMeta(
        title=arxiv_id,
        authors=[],
        year=0,
        warning=f"no metadata available for {arxiv_id}; rendered id-only",
    )


# -- finalization -------------------------------------------------------------


def finalize(
    draft: str,
    shortlist_ids: list[str],
    params: GenerationParams,
    metadata: dict[str, CitationMeta] | None = None,
    extra_warnings: list[str] | None = None,
) -> RelatedWorkResult:
    """Ground the draft: map valid citation tokens to sequential keys and
    strip everything else.

    Tokens whose id is shortlisted become "[1]", "[2]", ... in order of
    first occurrence; unknown tokens are removed from the body and recorded
    as warnings. The returned result always satisfies citations subset-of
    shortlist and body-key/citation-list equality.
    """
    if not draft:
        raise ValidationError("draft must be non-empty", field="draft")
    shortlist = set(shortlist_ids)
    metadata = metadata or {}
    warnings = list(extra_warnings or [])

    key_by_id: dict[str, str] = {}
    order: list[str] = []

    def _replace(match: re.Match) -> str:
        arxiv_id = match.group(1)
        if arxiv_id not in shortlist:
            warnings.append(f"unsupported citation removed: {arxiv_id}")
            return ""
        if arxiv_id not in key_by_id:
            key_by_id[arxiv_id] = f"[{len(order) + 1}]"
            order.append(arxiv_id)
        return key_by_id[arxiv_id]

    body = CITATION_TOKEN_RE.sub(_replace, draft)
    # Tidy whitespace left behind by removed tokens.
    body = re.sub(r"[ \t]+", " ", body)
    body = re.sub(r" ([.,;:)])", r"\1", body).strip()

    citations = []
    for arxiv_id in order:
        meta = metadata.get(arxiv_id) or CitationMeta(title=arxiv_id, authors=[], year=0)
        if meta.warning:
            warnings.append(meta.warning)
        citations.append(
            Citation(
                key=key_by_id[arxiv_id],
                arxiv_id=arxiv_id,
                title=meta.title,
                authors=meta.authors,
                year=meta.year,
                url=arxiv_url(arxiv_id),
            )
        )
    if not citations:
        warnings.append("draft contained no valid citation tokens")
    return RelatedWorkResult(
        body=body,
        citations=citations,
        params_used=params,
        shortlist_ids=list(shortlist_ids),
        warnings=warnings,
    )
