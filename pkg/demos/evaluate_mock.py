"""Score generated sections with a mock LLM judge and aggregate the stats.

The judge protocol is a strict "Score: <n>" format (0-10). Unparsable or
out-of-range replies get one reprompt, then count as failures — never a
coerced number. Aggregation reports mean, sum, and sample std per judge.
"""

from __future__ import annotations

from refsynth.evaluation import aggregate, judge_quality, judge_relevance, render_table
from refsynth.synthesis import LlmConfig


class MockJudge:
    """Deterministic stand-in: score derived from the prompt bytes."""

    def complete(self, prompt: str, config: LlmConfig) -> str:
        return f"Score: {sum(prompt.encode()) % 11}"


judge = MockJudge()
config = LlmConfig()

source = "a study of diverse retrieval for grounded literature synthesis"
citations = {
    "2401.00001": "retrieval with diversity-weighted greedy selection",
    "2401.00002": "grounded generation with explicit citation tokens",
    "2401.00003": "benchmarking hallucination in cited claims",
}
section = "Prior work spans retrieval [1], grounding [2], and evaluation [3]."

scores = []
for arxiv_id, abstract in citations.items():
    out = judge_relevance(source, abstract, judge, config, item_id=arxiv_id)
    scores.append(out)
    print(f"relevance {arxiv_id}: {out.score}")

quality = judge_quality(section, source, judge, config, item_id="section")
print(f"quality: {quality.score}\n")

reports = {
    "relevance": aggregate(scores, metric="relevance"),
    "quality": aggregate([quality], metric="quality"),
}
print(render_table(reports))
