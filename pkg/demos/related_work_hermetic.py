"""Generate a citation-grounded related-work section fully offline.

Uses the hermetic backend bundle (hash embedder, scripted LLM, synthetic
full-text fetcher) so the whole retrieve -> filter -> summarize ->
synthesize pipeline runs deterministically without network access.
"""

from __future__ import annotations

from refsynth.config import AppConfig
from refsynth.pipeline import PipelineConfig, generate_related_work
from refsynth.selection import GenerationParams
from refsynth.service import build_hermetic_backends

ABSTRACT = (
    "genomics study of estimation and inference over measurement data with "
    "a framework for evaluation and simulation of experimental benchmark "
    "structure dynamics and observation models in applied settings"
)

backends = build_hermetic_backends(AppConfig(hermetic=True, dim=64), corpus_size=500)

result = generate_related_work(
    store=backends.store,
    embedder=backends.embedder,
    llm=backends.llm,
    llm_config=backends.llm_config,
    fetcher=backends.fetcher,
    params=GenerationParams(breadth=8, depth=2, diversity=0.3),
    config=PipelineConfig(),
    abstract=ABSTRACT,
    progress=lambda stage, note: print(f"[{stage}] {note}"),
)

print("\n--- generated section ---")
print(result.body)

print("\n--- citations ---")
for citation in result.citations:
    print(f"  {citation.key} {citation.arxiv_id}  {citation.url}")

if result.warnings:
    print("\n--- warnings ---")
    for warning in result.warnings:
        print(f"  {warning}")
