"""Hermetic backends and fixture generators.

Everything here is deterministic: the scripted LLM, the synthetic full-text
fetcher, and the mini-corpus generator all derive their output from their
inputs (plus a fixed seed), so full pipeline runs are byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import random

from .embedding import HashEmbedder
from .synthesis import CITATION_TOKEN_RE, LlmConfig

__all__ = [
    "HashEmbedder",
    "ScriptedLlm",
    "SyntheticFetcher",
    "generate_corpus_records",
    "corpus_jsonl_lines",
]

_TOPIC_WORDS = [
    "optics",
    "algebra",
    "genomics",
    "robotics",
    "cosmology",
    "cryptography",
    "epidemiology",
    "thermodynamics",
]

_FILLER = (
    "study analysis method results model data experiment approach framework "
    "evaluation system theory measurement structure dynamics estimation "
    "inference observation simulation benchmark"
).split()


def generate_corpus_records(
    n: int = 1000, seed: int = 7, id_prefix: str = "24"
) -> list[dict]:
    """Synthetic arXiv-style metadata records with topical vocabulary.

    Each abstract leads with a topic word and draws most of its vocabulary
    from a topic-biased pool, so hash-based embeddings still exhibit usable
    similarity structure between records sharing topics.
    """
    rng = random.Random(seed)
    records = []
    for i in range(n):
        topic = _TOPIC_WORDS[i % len(_TOPIC_WORDS)]
        words = [topic]
        for _ in range(60):
            if rng.random() < 0.5:
                words.append(topic)
            else:
                words.append(rng.choice(_FILLER))
        month = (i % 12) + 1
        arxiv_id = f"{id_prefix}{month:02d}.{10000 + i}"
        records.append(
            {
                "id": arxiv_id,
                "title": f"{topic.capitalize()} study {i}",
                "authors": [f"Author {i % 37}", f"Author {(i * 7) % 53}"],
                "abstract": " ".join(words),
                "update_date": f"20{id_prefix}-{month:02d}-{(i % 27) + 1:02d}",
            }
        )
    return records


def corpus_jsonl_lines(records: list[dict]) -> list[str]:
    return [json.dumps(r, sort_keys=True) for r in records]


class SyntheticFetcher:
    """Full-text fetcher returning pages derived from stored abstracts.

    Page texts reuse the paper's abstract vocabulary with per-page
    variation, plus a trailing references page that cleaning removes.
    """

    def __init__(self, store, pages_per_doc: int = 4):
        self.store = store
        self.pages_per_doc = pages_per_doc
        self.fetch_count = 0

    def fetch_pages(self, arxiv_id: str) -> list[str]:
        self.fetch_count += 1
        record = self.store.get(arxiv_id)
        if record is None:
            raise KeyError(f"unknown paper {arxiv_id}")
        pages = []
        for i in range(self.pages_per_doc):
            pages.append(
                f"{record.abstract} section {i + 1} of {arxiv_id} "
                f"further discussion [%d] continues here" % (i + 1)
            )
        pages.append("References\n[1] A citation.\n[2] Another citation.")
        return pages


class ScriptedLlm:
    """Deterministic stand-in for the LLM backend.

    Summary prompts produce a short digest keyed to the prompt content;
    synthesis prompts produce a section citing every token found in the
    prompt, in order. Output depends only on the prompt text.
    """

    def __init__(self):
        self.calls: list[str] = []

    def complete(self, prompt: str, config: LlmConfig) -> str:
        self.calls.append(prompt)
        tokens = CITATION_TOKEN_RE.findall(prompt)
        if tokens:
            seen = list(dict.fromkeys(tokens))
            sentences = [
                f"Prior work [@arxiv:{t}] investigated closely related questions."
                for t in seen
            ]
            opening = (
                "The question at hand connects to several strands of prior work. "
                if "Question:" in prompt
                else "Several prior works relate to the present study. "
            )
            return opening + " ".join(sentences)
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:12]
        return f"Digest {digest}: this paper studies a closely related problem."
