import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumloop.strategies import (
    Budgets,
    ScoreEntry,
    ScoreNormalization,
    ScoreTable,
    SelectionKind,
    StrategyError,
    StrategySpec,
    compute_budget,
    select,
)


def table(pairs, normalization=ScoreNormalization.NONE):
    return ScoreTable(
        tuple(ScoreEntry(sid, score, 10) for sid, score in pairs), normalization
    )


class TestComputeBudget:
    def test_one_percent_of_900(self):
        assert compute_budget(900, 0.01) == 9

    def test_ceil_forced(self):
        assert compute_budget(150, 0.01) == 2

    def test_zero_fraction(self):
        assert compute_budget(12345, 0.0) == 0

    def test_no_float_creep_on_exact_multiples(self):
        # 0.01 * size must never ceil one step too far.
        for size in (100, 200, 300, 900, 1000, 10000):
            assert compute_budget(size, 0.01) == size // 100

    def test_full_fraction(self):
        assert compute_budget(7, 1.0) == 7

    def test_bad_inputs(self):
        with pytest.raises(StrategyError):
            compute_budget(-1, 0.01)
        with pytest.raises(StrategyError):
            compute_budget(10, 1.5)


class TestSelect:
    def test_top_takes_max_score(self):
        scores = table([("a", -0.9), ("b", -0.5), ("c", -0.1)])
        assert select(SelectionKind.TOP, scores, 1, seed=0) == ["c"]

    def test_bottom_takes_min_score(self):
        scores = table([("a", -0.9), ("b", -0.5), ("c", -0.1)])
        assert select(SelectionKind.BOTTOM, scores, 1, seed=0) == ["a"]

    def test_middle_takes_median(self):
        scores = table([("a", -0.9), ("b", -0.5), ("c", -0.1)])
        assert select(SelectionKind.MIDDLE, scores, 1, seed=0) == ["b"]

    def test_none_selects_nothing(self):
        scores = table([("a", -0.9)])
        assert select(SelectionKind.NONE, scores, 1, seed=0) == []

    def test_zero_budget_selects_nothing(self):
        scores = table([("a", -0.9)])
        assert select(SelectionKind.TOP, scores, 0, seed=0) == []

    def test_ties_break_by_id(self):
        # All scores equal: the ascending sort is purely lexicographic,
        # so bottom-2 must be the two smallest ids.
        scores = table([("delta", -1.0), ("alpha", -1.0), ("charlie", -1.0), ("bravo", -1.0)])
        assert select(SelectionKind.BOTTOM, scores, 2, seed=0) == ["alpha", "bravo"]
        assert select(SelectionKind.TOP, scores, 2, seed=0) == ["delta", "charlie"]

    def test_random_is_reproducible(self):
        scores = table([(f"s{i:03d}", -float(i)) for i in range(100)])
        one = select(SelectionKind.RANDOM, scores, 10, seed=42)
        two = select(SelectionKind.RANDOM, scores, 10, seed=42)
        other = select(SelectionKind.RANDOM, scores, 10, seed=43)
        assert one == two
        assert len(set(one)) == 10
        assert one != other

    def test_budget_above_table_size_rejected(self):
        scores = table([("a", -0.9)])
        with pytest.raises(StrategyError, match="exceeds"):
            select(SelectionKind.TOP, scores, 2, seed=0)

    def test_per_token_normalization_changes_ranking(self):
        entries = (
            ScoreEntry("long", -5.0, 100),   # -0.05 per token
            ScoreEntry("short", -2.0, 4),    # -0.5 per token
        )
        raw = ScoreTable(entries, ScoreNormalization.NONE)
        per_token = ScoreTable(entries, ScoreNormalization.PER_TOKEN)
        assert select(SelectionKind.TOP, raw, 1, seed=0) == ["short"]
        assert select(SelectionKind.TOP, per_token, 1, seed=0) == ["long"]


class TestScoreTableInvariants:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(StrategyError, match="duplicate"):
            table([("a", -1.0), ("a", -2.0)])

    def test_non_finite_scores_rejected(self):
        with pytest.raises(StrategyError, match="finite"):
            table([("a", math.nan)])
        with pytest.raises(StrategyError, match="finite"):
            table([("a", math.inf)])


class TestStrategySpec:
    def test_pl_only_none_or_top(self):
        with pytest.raises(StrategyError):
            StrategySpec(pl=SelectionKind.BOTTOM)

    def test_fraction_bounds(self):
        with pytest.raises(StrategyError):
            StrategySpec(pl_fraction=1.5)

    def test_budgets_zero_when_strategy_none(self):
        spec = StrategySpec(pl=SelectionKind.NONE, hl=SelectionKind.BOTTOM)
        budgets = Budgets.from_spec(spec, 900)
        assert budgets.b_pseudo == 0
        assert budgets.b_expert == 9


ids_and_scores = st.dictionaries(
    st.text(alphabet="abcdefgh", min_size=1, max_size=6),
    st.floats(min_value=-100, max_value=0, allow_nan=False),
    min_size=1,
    max_size=30,
)


@settings(max_examples=200, deadline=None)
@given(scores=ids_and_scores, data=st.data())
def test_selects_exact_count_of_distinct_scored_ids(scores, data):
    tbl = table(sorted(scores.items()))
    budget = data.draw(st.integers(min_value=0, max_value=len(scores)))
    kind = data.draw(st.sampled_from([SelectionKind.TOP, SelectionKind.BOTTOM,
                                      SelectionKind.MIDDLE, SelectionKind.RANDOM]))
    picked = select(kind, tbl, budget, seed=7)
    assert len(picked) == budget
    assert len(set(picked)) == budget
    assert set(picked) <= set(scores)


@settings(max_examples=200, deadline=None)
@given(scores=ids_and_scores, data=st.data())
def test_top_and_bottom_disjoint_when_room(scores, data):
    tbl = table(sorted(scores.items()))
    budget = data.draw(st.integers(min_value=0, max_value=len(scores) // 2))
    top = select(SelectionKind.TOP, tbl, budget, seed=0)
    bottom = select(SelectionKind.BOTTOM, tbl, budget, seed=0)
    assert not set(top) & set(bottom)


@settings(max_examples=200, deadline=None)
@given(scores=ids_and_scores, data=st.data())
def test_rank_selections_invariant_under_increasing_transform(scores, data):
    tbl = table(sorted(scores.items()))
    budget = data.draw(st.integers(min_value=0, max_value=len(scores)))
    # Doubling is exact on floats, so it is strictly increasing on any
    # realized score values (exp/log-style transforms can collapse
    # near-equal floats and genuinely change tie-breaks).
    transformed = table(sorted((sid, 2.0 * s) for sid, s in scores.items()))
    for kind in (SelectionKind.TOP, SelectionKind.BOTTOM, SelectionKind.MIDDLE):
        assert select(kind, tbl, budget, seed=0) == select(kind, transformed, budget, seed=0)


def test_rank_selections_invariant_under_exp_transform():
    scores = [("a", -9.0), ("b", -7.5), ("c", -4.0), ("d", -2.0), ("e", -0.5)]
    tbl = table(scores)
    transformed = table([(sid, math.exp(s)) for sid, s in scores])
    for kind in (SelectionKind.TOP, SelectionKind.BOTTOM, SelectionKind.MIDDLE):
        for budget in range(len(scores) + 1):
            assert select(kind, tbl, budget, seed=0) == select(kind, transformed, budget, seed=0)


def test_random_inclusion_frequency_is_uniform():
    n, budget, trials = 20, 5, 2000
    tbl = table([(f"s{i:02d}", -float(i)) for i in range(n)])
    counts = {f"s{i:02d}": 0 for i in range(n)}
    for seed in range(trials):
        for sid in select(SelectionKind.RANDOM, tbl, budget, seed=seed):
            counts[sid] += 1
    expected = trials * budget / n
    # ~4.3 sigma tolerance for a binomial(trials, budget/n) count.
    sigma = math.sqrt(trials * (budget / n) * (1 - budget / n))
    for sid, count in counts.items():
        assert abs(count - expected) < 4.3 * sigma, (sid, count, expected)
