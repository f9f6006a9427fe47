"""Property-based checks of the core invariants."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from refsynth.fulltext import clean_text
from refsynth.selection import SelectionCandidate, greedy_select
from refsynth.store import normalize


@st.composite
def pools(draw, max_size=8, dim=4):
    size = draw(st.integers(min_value=1, max_value=max_size))
    pool = []
    for i in range(size):
        raw = draw(
            st.lists(
                st.floats(min_value=-1, max_value=1).filter(lambda x: abs(x) > 1e-6),
                min_size=dim,
                max_size=dim,
            )
        )
        sim = draw(st.floats(min_value=-1, max_value=1))
        pool.append(
            SelectionCandidate(
                id=f"c{i:02d}", embedding=normalize(np.array(raw)), query_similarity=sim
            )
        )
    return pool


@given(pools(), st.data())
@settings(max_examples=200, deadline=None)
def test_w_zero_is_similarity_sort(pool, data):
    n = data.draw(st.integers(min_value=1, max_value=len(pool)))
    expected = [c.id for c in sorted(pool, key=lambda c: (-c.query_similarity, c.id))[:n]]
    assert greedy_select(pool, n, 0.0).ids == expected


@given(pools(max_size=6), st.data())
@settings(max_examples=100, deadline=None)
def test_selection_has_no_duplicates_and_fixed_first_pick(pool, data):
    n = data.draw(st.integers(min_value=1, max_value=len(pool)))
    w = data.draw(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))
    result = greedy_select(pool, n, w)
    assert len(result.ids) == n == len(set(result.ids))
    assert result.ids[0] == greedy_select(pool, 1, 0.0).ids[0]


@given(st.text(max_size=400))
@settings(max_examples=300, deadline=None)
def test_clean_text_idempotent_and_contracting(page):
    once = clean_text(page)
    assert len(once) <= max(len(page), 0)
    assert clean_text(once) == once
