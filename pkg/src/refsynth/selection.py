"""Diversity-weighted greedy candidate selection and longlist construction.

The selection rule trades query similarity against dissimilarity to the
already-chosen set. With weight w in [0, 1], the first pick is the plain
similarity argmax; every subsequent pick maximizes

    (1 - w) * s_i  +  w * (1 - min_{j in chosen} sim(e_i, e_j))

over the unchosen candidates. All ties break by ascending candidate id, so
the output is invariant under pool permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpusError, ValidationError


@dataclass
class GenerationParams:
    """The three user knobs controlling retrieval and synthesis."""

    breadth: int = 10
    depth: int = 2
    diversity: float = 0.0

    def validate(self) -> None:
        if not (1 <= self.breadth <= 50):
            raise ValidationError("breadth must be in [1, 50]", field="breadth")
        if not (1 <= self.depth <= 20):
            raise ValidationError("depth must be in [1, 20]", field="depth")
        if not (0.0 <= self.diversity <= 1.0):
            raise ValidationError("diversity must be in [0, 1]", field="diversity")


@dataclass
class SelectionCandidate:
    id: str
    embedding: np.ndarray
    query_similarity: float


@dataclass
class SelectionResult:
    selected: list[SelectionCandidate]
    pool_exhausted: bool = False  # fewer hits than requested breadth
    warnings: list[str] = field(default_factory=list)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.selected]


def greedy_select(
    pool: list[SelectionCandidate], n: int, w: float
) -> SelectionResult:
    """Pick ``n`` candidates from ``pool`` by the diversity-weighted rule."""
    if not pool:
        raise ValidationError("pool must be non-empty", field="pool")
    if n < 1:
        raise ValidationError("n must be >= 1", field="n")
    if n > len(pool):
        raise ValidationError("n exceeds pool size", field="n")
    if not (0.0 <= w <= 1.0):
        raise ValidationError("w must be in [0, 1]", field="w")

    order = sorted(range(len(pool)), key=lambda i: pool[i].id)
    cands = [pool[i] for i in order]
    sims = np.array([c.query_similarity for c in cands])
    matrix = np.stack([c.embedding for c in cands])

    chosen: list[int] = []
    remaining = list(range(len(cands)))
    # Minimum similarity of each candidate to the chosen set so far.
    min_sim = np.full(len(cands), np.inf)

    # First pick: plain similarity argmax (ties already id-ordered).
    first = max(remaining, key=lambda i: sims[i])
    chosen.append(first)
    remaining.remove(first)
    min_sim = np.minimum(min_sim, matrix @ matrix[first])

    while len(chosen) < n:
        scores = (1.0 - w) * sims + w * (1.0 - min_sim)
        best = max(remaining, key=lambda i: scores[i])
        chosen.append(best)
        remaining.remove(best)
        min_sim = np.minimum(min_sim, matrix @ matrix[best])

    return SelectionResult(selected=[cands[i] for i in chosen])


def build_longlist(
    query,
    params: GenerationParams,
    store,
    pool_factor: int = 5,
    exclude_self_threshold: float | None = 0.999,
) -> SelectionResult:
    """Query the store and run greedy selection over the hit pool.

    Retrieves pool_factor x breadth hits; near-exact matches to the query
    (similarity >= exclude_self_threshold) are excluded so the input paper
    never cites itself. Returns fewer than ``breadth`` candidates when the
    store cannot supply enough, flagged via ``pool_exhausted``.
    """
    params.validate()
    if store.count() == 0:
        raise EmptyCorpusError("corpus store is empty")
    pool_size = pool_factor * params.breadth
    hits = store.search(query, pool_size)
    warnings: list[str] = []
    if exclude_self_threshold is not None:
        excluded = [h for h in hits if h.similarity >= exclude_self_threshold]
        if excluded:
            hits = [h for h in hits if h.similarity < exclude_self_threshold]
            warnings.append(
                "excluded near-exact query matches: "
                + ", ".join(h.arxiv_id for h in excluded)
            )
    if not hits:
        raise EmptyCorpusError("no candidates retrieved for the query")
    pool = [
        SelectionCandidate(
            id=h.arxiv_id,
            embedding=store.get(h.arxiv_id).embedding,
            query_similarity=h.similarity,
        )
        for h in hits
    ]
    n = min(params.breadth, len(pool))
    result = greedy_select(pool, n, params.diversity)
    result.pool_exhausted = len(pool) < params.breadth
    result.warnings = warnings + result.warnings
    if result.pool_exhausted:
        result.warnings.append(
            f"only {len(pool)} candidates available for breadth {params.breadth}"
        )
    return result
