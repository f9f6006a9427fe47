"""End-to-end orchestration: retrieve, filter, summarize, synthesize.

This is the single entry point the service and CLI call. All backends
(store, embedder, LLM, full-text fetcher) are injected, so the whole run is
hermetic and byte-deterministic with the mock backends.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

from .errors import PipelineError, ValidationError
from .fulltext import (
    Fetcher,
    build_shortlist,
    clean_pages,
    fetch_fulltext,
    match_full_paper,
    score_pages,
    select_pages,
)
from .selection import GenerationParams, build_longlist
from .synthesis import (
    CitationMeta,
    LlmClient,
    LlmConfig,
    fetch_citation_metadata,
    finalize,
    summarize_paper,
    synthesize,
)

logger = logging.getLogger(__name__)

ProgressFn = Callable[[str, str], None]  # (stage, note)


def _noop_progress(stage: str, note: str) -> None:
    pass


@dataclass
class PipelineConfig:
    pool_factor: int = 5
    shortlist_cap: int = 12
    keep_fraction: float = 0.7
    exclude_self_threshold: float | None = 0.999
    remote_citation_metadata: bool = False


def generate_related_work(
    store,
    embedder,
    llm: LlmClient,
    llm_config: LlmConfig,
    fetcher: Fetcher,
    params: GenerationParams,
    abstract: str | None = None,
    input_pages: list[str] | None = None,
    mode: str = "related-work",
    question: str | None = None,
    config: PipelineConfig | None = None,
    progress: ProgressFn = _noop_progress,
):
    """Run the full pipeline and return a RelatedWorkResult.

    Exactly one of ``abstract`` / ``input_pages`` drives retrieval: an
    abstract goes through the similarity query, a full paper through
    per-page aggregate matching. ``abstract`` (or the first cleaned input
    page) also anchors page scoring and summarization.
    """
    config = config or PipelineConfig()
    params.validate()
    warnings: list[str] = []

    if input_pages is not None:
        cleaned = clean_pages(input_pages)
        if not cleaned:
            raise ValidationError("input document has no usable text")
        query_text = abstract if abstract else cleaned[0]
        progress("retrieving", "matching full paper against the corpus")
        longlist = match_full_paper(
            input_pages, params, store, embedder, pool_factor=config.pool_factor
        )
    elif abstract is not None:
        query_text = abstract
        progress("retrieving", "querying the corpus by abstract similarity")
        query_vec = embedder.embed_texts([abstract])[0]
        longlist = build_longlist(
            query_vec,
            params,
            store,
            pool_factor=config.pool_factor,
            exclude_self_threshold=config.exclude_self_threshold,
        )
    else:
        raise ValidationError("either abstract or input_pages is required")
    warnings.extend(longlist.warnings)

    query_vec = embedder.embed_texts([query_text])[0]

    progress("filtering", f"fetching and scoring {len(longlist.selected)} candidates")
    survivors = []
    for candidate in longlist.selected:
        doc = fetch_fulltext(candidate.id, fetcher)
        if doc is None:
            warnings.append(f"candidate dropped (fetch/extract failed): {candidate.id}")
            continue
        try:
            scored = score_pages(doc, query_vec, embedder)
        except Exception as exc:
            warnings.append(f"candidate dropped (embedding failed): {candidate.id}")
            logger.warning("dropping %s: %s", candidate.id, exc)
            continue
        selected = select_pages(scored, params.depth, params.diversity)
        record = store.get(candidate.id)
        candidate_abstract = record.abstract if record is not None else ""
        survivors.append((candidate.id, candidate_abstract, selected))
    if not survivors:
        raise PipelineError("no usable sources: every longlist candidate was dropped")

    shortlist = build_shortlist(
        survivors,
        params,
        shortlist_cap=config.shortlist_cap,
        keep_fraction=config.keep_fraction,
    )
    shortlist_ids = [e.arxiv_id for e in shortlist]

    progress("summarizing", f"summarizing {len(shortlist)} shortlisted papers")
    summaries = []
    for entry in shortlist:
        summary = summarize_paper(query_text, entry, llm, llm_config)
        if summary is None:
            warnings.append(f"shortlist entry dropped (summarization failed): {entry.arxiv_id}")
            continue
        summaries.append(summary)
    if not summaries:
        raise PipelineError("no usable sources: every summary failed")

    progress("synthesizing", "composing the final section")
    draft = synthesize(
        query_text, summaries, llm, llm_config, mode=mode, question=question
    )

    metadata: dict[str, CitationMeta] = {}
    for arxiv_id in shortlist_ids:
        metadata[arxiv_id] = fetch_citation_metadata(
            arxiv_id, store=store, remote=config.remote_citation_metadata
        )
    return finalize(
        draft, shortlist_ids, params, metadata=metadata, extra_warnings=warnings
    )
