"""LLM-as-a-judge scoring of source relevance and writing quality.

Judges answer single-item prompts (no pairwise comparison) in a constrained
"Score: <n>" format; anything unparsable or out of range is recorded as a
failure after one reprompt, never coerced. Aggregation reports mean, sum,
and sample standard deviation per metric and judge.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .synthesis import LlmClient, LlmConfig, load_template

logger = logging.getLogger(__name__)

_SCORE_RE = re.compile(r"^\s*Score:\s*(\d+)\s*$", re.MULTILINE)


@dataclass
class JudgeScore:
    judge_id: str
    item_id: str
    score: int
    raw_response: str


@dataclass
class JudgeFailure:
    judge_id: str
    item_id: str
    reason: str
    raw_response: str


@dataclass
class MetricStats:
    n: int
    mean: float
    sum: float
    std: float


@dataclass
class EvalReport:
    metrics: dict[str, MetricStats]
    per_judge: dict[str, dict[str, MetricStats]]
    n_items: int
    failures: list[JudgeFailure] = field(default_factory=list)

    def to_dict(self) -> dict:
        def stats(s: MetricStats) -> dict:
            return {"n": s.n, "mean": s.mean, "sum": s.sum, "std": s.std}

        return {
            "metrics": {k: stats(v) for k, v in self.metrics.items()},
            "per_judge": {
                j: {k: stats(v) for k, v in m.items()}
                for j, m in self.per_judge.items()
            },
            "n_items": self.n_items,
            "failures": [
                {"judge_id": f.judge_id, "item_id": f.item_id, "reason": f.reason}
                for f in self.failures
            ],
        }


def parse_score(response: str) -> int | None:
    """Extract a 0-10 integer from a 'Score: <n>' response; None if invalid."""
    match = _SCORE_RE.search(response)
    if not match:
        return None
    value = int(match.group(1))
    if not (0 <= value <= 10):
        return None
    return value


def _run_judge(
    prompt: str, judge_id: str, item_id: str, llm: LlmClient, config: LlmConfig
) -> JudgeScore | JudgeFailure:
    response = ""
    for _ in range(2):  # one reprompt on parse failure
        response = llm.complete(prompt, config)
        score = parse_score(response)
        if score is not None:
            return JudgeScore(
                judge_id=judge_id, item_id=item_id, score=score, raw_response=response
            )
    return JudgeFailure(
        judge_id=judge_id,
        item_id=item_id,
        reason="unparsable or out-of-range score",
        raw_response=response,
    )


def judge_relevance(
    source_abstract: str,
    citation_abstract: str,
    llm: LlmClient,
    config: LlmConfig,
    judge_id: str = "judge",
    item_id: str = "item",
) -> JudgeScore | JudgeFailure:
    if not source_abstract.strip() or not citation_abstract.strip():
        raise ValidationError("abstracts must be non-empty", field="abstract")
    prompt = load_template("judge_relevance").format(
        source_abstract=source_abstract, citation_abstract=citation_abstract
    )
    return _run_judge(prompt, judge_id, item_id, llm, config)


def judge_quality(
    section_text: str,
    source_abstract: str,
    llm: LlmClient,
    config: LlmConfig,
    judge_id: str = "judge",
    item_id: str = "item",
) -> JudgeScore | JudgeFailure:
    if not section_text.strip() or not source_abstract.strip():
        raise ValidationError("section and abstract must be non-empty")
    prompt = load_template("judge_quality").format(
        source_abstract=source_abstract, section=section_text
    )
    return _run_judge(prompt, judge_id, item_id, llm, config)


def _stats(values: list[int]) -> MetricStats:
    values = sorted(values)  # bit-identical results under permutation
    n = len(values)
    total = float(sum(values))
    mean = total / n
    if n > 1:
        var = sum((v - mean) ** 2 for v in values) / (n - 1)
        std = math.sqrt(var)
    else:
        std = 0.0  # single-item std defined as 0
    return MetricStats(n=n, mean=mean, sum=total, std=std)


def aggregate(scores: list[JudgeScore], metric: str = "score") -> EvalReport:
    """Mean/sum/sample-std aggregation over parsed judge scores."""
    if not scores:
        raise ValidationError("no parsed scores to aggregate", field="scores")
    metrics = {metric: _stats([s.score for s in scores])}
    per_judge: dict[str, dict[str, MetricStats]] = {}
    for judge_id in sorted({s.judge_id for s in scores}):
        judge_scores = [s.score for s in scores if s.judge_id == judge_id]
        per_judge[judge_id] = {metric: _stats(judge_scores)}
    return EvalReport(
        metrics=metrics,
        per_judge=per_judge,
        n_items=len({s.item_id for s in scores}),
    )


# -- directory-of-cases driver ------------------------------------------------


def run_cases(
    cases_dir: str | Path,
    judges: list[tuple[str, LlmClient, LlmConfig]],
) -> dict[str, EvalReport]:
    """Score every case file in a directory with every configured judge.

    Case file schema (JSON): ``{"source_abstract", "section", "citations":
    [{"arxiv_id", "abstract"}, ...]}``. Returns reports keyed "relevance"
    and "quality".
    """
    cases_dir = Path(cases_dir)
    case_files = sorted(cases_dir.glob("*.json"))
    if not case_files:
        raise ValidationError(f"no case files in {cases_dir}", field="cases")

    rel_scores: list[JudgeScore] = []
    qual_scores: list[JudgeScore] = []
    failures: list[JudgeFailure] = []
    for path in case_files:
        case = json.loads(path.read_text("utf-8"))
        source = case["source_abstract"]
        for judge_id, llm, config in judges:
            for i, citation in enumerate(case.get("citations", [])):
                out = judge_relevance(
                    source,
                    citation["abstract"],
                    llm,
                    config,
                    judge_id=judge_id,
                    item_id=f"{path.stem}:{citation.get('arxiv_id', i)}",
                )
                (rel_scores if isinstance(out, JudgeScore) else failures).append(out)
            if case.get("section"):
                out = judge_quality(
                    case["section"],
                    source,
                    llm,
                    config,
                    judge_id=judge_id,
                    item_id=path.stem,
                )
                (qual_scores if isinstance(out, JudgeScore) else failures).append(out)

    reports: dict[str, EvalReport] = {}
    if rel_scores:
        reports["relevance"] = aggregate(rel_scores, metric="relevance")
    if qual_scores:
        reports["quality"] = aggregate(qual_scores, metric="quality")
    for report in reports.values():
        report.failures = failures
    return reports


def render_table(reports: dict[str, EvalReport]) -> str:
    """Plain-text summary table of the aggregated metrics."""
    lines = [f"{'metric':<12} {'judge':<12} {'n':>5} {'mean':>8} {'sum':>9} {'std':>8}"]
    for name, report in sorted(reports.items()):
        for metric, stats in report.metrics.items():
            lines.append(
                f"{metric:<12} {'(all)':<12} {stats.n:>5} "
                f"{stats.mean:>8.2f} {stats.sum:>9.2f} {stats.std:>8.2f}"
            )
        for judge_id, per_metric in report.per_judge.items():
            for metric, stats in per_metric.items():
                lines.append(
                    f"{metric:<12} {judge_id:<12} {stats.n:>5} "
                    f"{stats.mean:>8.2f} {stats.sum:>9.2f} {stats.std:>8.2f}"
                )
    return "\n".join(lines)
