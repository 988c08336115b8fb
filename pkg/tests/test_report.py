"""Concept/affirmation F1 and aggregate evaluation.

The golden fixture below is hand-computed from the definitions: per
example, precision = |overlap| / |predicted set|, recall =
|overlap| / |reference set|, F1 their harmonic mean, and a conservative
0.0 whenever either side has no detected items.
"""

import pytest

from sumloop.corpus import Sample, Speaker, Turn
from sumloop.metrics import (
    ConceptLexicon,
    EvaluationError,
    NegexRules,
    affirmation_f1,
    concept_f1,
    evaluate,
    theoretical_max,
)


@pytest.fixture(scope="module")
def lexicon():
    return ConceptLexicon.from_entries(
        {
            "fever": ["fever"],
            "cough": ["cough", "dry cough"],
            "headache": ["headache"],
            "nausea": ["nausea"],
            "chest_pain": ["chest pain"],
        }
    )


@pytest.fixture(scope="module")
def rules():
    return NegexRules.from_phrases(
        pre=["no", "not", "denies", "without"],
        post=["not present", "resolved", "unlikely"],
        pseudo=["no increase", "not only"],
        term=["but", "however"],
        scope_window=5,
    )


# (predicted, reference, expected_concept_f1, expected_affirmation_f1)
GOLDEN_CASES = [
    # identities and plain overlaps
    ("patient has fever", "patient has fever", 1.0, 1.0),
    ("fever", "fever and cough", 2 / 3, 2 / 3),
    ("fever cough headache", "fever", 1 / 2, 1 / 2),
    ("fever", "fever cough headache nausea", 2 / 5, 2 / 5),
    ("headache and nausea", "headache", 2 / 3, 2 / 3),
    ("dry cough", "cough", 1.0, 1.0),
    ("chest pain", "chest pain", 1.0, 1.0),
    ("fever fever fever", "fever", 1.0, 1.0),
    # conservative zeros: no concepts detected on a side
    ("", "fever", 0.0, 0.0),
    ("fever", "", 0.0, 0.0),
    ("", "", 0.0, 0.0),
    ("nothing relevant here", "also nothing relevant", 0.0, 0.0),
    ("feverish", "fever", 0.0, 0.0),
    ("chest", "chest pain", 0.0, 0.0),
    # zero overlap
    ("fever cough", "headache nausea", 0.0, 0.0),
    # negation-sensitive cases: concept sets agree, statuses may not
    ("denies fever", "denies fever", 1.0, 1.0),
    ("has fever", "denies fever", 1.0, 0.0),
    ("denies fever, has cough", "denies fever, has cough", 1.0, 1.0),
    ("no cough but fever", "cough and fever", 1.0, 1 / 2),
    ("no nausea however fever", "nausea and fever", 1.0, 1 / 2),
    ("not fever", "fever not present", 1.0, 1.0),
    ("no increase fever", "fever", 1.0, 1.0),
    ("cough resolved", "no cough", 1.0, 1.0),
    # scope window (5 tokens): far trigger does not negate
    ("no alpha beta gamma delta epsilon fever", "fever", 1.0, 1.0),
    ("no alpha beta gamma fever", "denies fever", 1.0, 1.0),
]


@pytest.mark.parametrize(
    "predicted,reference,expected_concept,expected_affirmation",
    GOLDEN_CASES,
    ids=[f"{c[0][:24]}|{c[1][:24]}" for c in GOLDEN_CASES],
)
def test_golden_case(predicted, reference, expected_concept, expected_affirmation, lexicon, rules):
    assert concept_f1(predicted, reference, lexicon) == expected_concept
    assert affirmation_f1(predicted, reference, lexicon, rules) == expected_affirmation


def test_golden_fixture_is_large_enough():
    assert len(GOLDEN_CASES) >= 25


def _sample(sample_id, summary):
    return Sample(
        id=sample_id,
        turns=(Turn(Speaker.PATIENT, "hello I feel sick"),),
        gold_summary=summary,
    )


class TestEvaluate:
    def test_single_example_macro_mean(self, lexicon, rules):
        test_set = [_sample("x", "fever and cough")]
        report = evaluate([("x", "fever")], test_set, lexicon, rules)
        assert report.concept_f1 == 2 / 3
        assert report.n_examples == 1

    def test_golds_equal_theoretical_max(self, lexicon, rules):
        test_set = [
            _sample("a", "fever and cough"),
            _sample("b", "denies headache"),
            _sample("c", "no concepts in this one"),
            _sample("d", "nausea"),
        ]
        golds = [(s.id, s.gold_summary) for s in test_set]
        report = evaluate(golds, test_set, lexicon, rules)
        ceiling = theoretical_max(test_set, lexicon, rules)
        assert report == ceiling

    def test_quarter_zero_concept_examples_cap_macro_max_at_750(self, lexicon, rules):
        test_set = [
            _sample("a", "fever"),
            _sample("b", "cough"),
            _sample("c", "headache"),
            _sample("d", "plain words only"),
        ]
        ceiling = theoretical_max(test_set, lexicon, rules)
        assert ceiling.concept_f1 == 0.75
        assert ceiling.affirmation_f1 == 0.75
        assert ceiling.rouge_l_f1 == 1.0

    def test_all_empty_predictions_score_zero(self, lexicon, rules):
        test_set = [_sample("a", "fever"), _sample("b", "cough")]
        report = evaluate([("a", ""), ("b", "")], test_set, lexicon, rules)
        assert report.concept_f1 == 0.0
        assert report.affirmation_f1 == 0.0
        assert report.rouge_l_f1 == 0.0

    def test_aggregate_is_mean_of_per_example(self, lexicon, rules):
        test_set = [_sample("a", "fever and cough"), _sample("b", "headache")]
        report = evaluate([("a", "fever"), ("b", "headache")], test_set, lexicon, rules)
        assert report.concept_f1 == sum(e.concept_f1 for e in report.per_example) / 2
        assert report.rouge_l_f1 == sum(e.rouge_l_f1 for e in report.per_example) / 2

    def test_per_example_sorted_by_id(self, lexicon, rules):
        test_set = [_sample("b", "fever"), _sample("a", "cough")]
        report = evaluate([("b", "fever"), ("a", "cough")], test_set, lexicon, rules)
        assert [e.sample_id for e in report.per_example] == ["a", "b"]

    def test_missing_and_extra_ids_rejected(self, lexicon, rules):
        test_set = [_sample("a", "fever")]
        with pytest.raises(EvaluationError, match="missing"):
            evaluate([], test_set, lexicon, rules)
        with pytest.raises(EvaluationError, match="extra"):
            evaluate([("a", "fever"), ("zz", "x")], test_set, lexicon, rules)

    def test_duplicate_prediction_rejected(self, lexicon, rules):
        test_set = [_sample("a", "fever")]
        with pytest.raises(EvaluationError, match="duplicate"):
            evaluate([("a", "fever"), ("a", "fever")], test_set, lexicon, rules)

    def test_micro_aggregation_differs_from_macro(self, lexicon, rules):
        # Example 1: P=1, R=1/2 (pred {fever} vs ref {fever, cough}).
        # Example 2: perfect single concept.
        # micro: overlap 2, pred total 2, ref total 3 -> F1 = 4/5.
        # macro: (2/3 + 1) / 2 = 5/6.
        test_set = [_sample("a", "fever and cough"), _sample("b", "headache")]
        preds = [("a", "fever"), ("b", "headache")]
        micro = evaluate(preds, test_set, lexicon, rules, aggregation="micro")
        macro = evaluate(preds, test_set, lexicon, rules, aggregation="macro")
        assert micro.concept_f1 == pytest.approx(4 / 5)
        assert macro.concept_f1 == pytest.approx(5 / 6)

    def test_conversation_concept_source(self, lexicon, rules):
        # The conversation mentions cough, the reference summary only fever:
        # with conversation-sourced reference concepts, a prediction naming
        # both scores recall 1 but precision against the conversation set.
        sample = Sample(
            id="x",
            turns=(Turn(Speaker.PATIENT, "i have a fever and a cough"),),
            gold_summary="fever",
        )
        summary_based = evaluate([("x", "fever cough")], [sample], lexicon, rules)
        conversation_based = evaluate(
            [("x", "fever cough")], [sample], lexicon, rules,
            concept_source="conversation",
        )
        assert summary_based.concept_f1 == 2 / 3  # P=1/2 vs {fever}, R=1
        assert conversation_based.concept_f1 == 1.0  # {fever, cough} both sides

    def test_conversation_source_requires_turns_and_valid_name(self, lexicon, rules):
        with pytest.raises(EvaluationError, match="concept_source"):
            evaluate([("a", "x")], [_sample("a", "fever")], lexicon, rules,
                     concept_source="sideways")

    def test_gold_vs_gold_affirmation_equals_concept_per_example(self, lexicon, rules):
        # The tagger assigns every extracted concept a status, so scoring
        # gold against itself gives identical concept and affirmation F1.
        test_set = [
            _sample("a", "denies fever but has cough"),
            _sample("b", "no headache"),
            _sample("c", "nothing here"),
        ]
        ceiling = theoretical_max(test_set, lexicon, rules)
        for example in ceiling.per_example:
            assert example.affirmation_f1 == example.concept_f1
