"""Per-example and aggregate scoring of predicted summaries.

Each test example receives three scores against its reference summary:

* concept F1 over the sets of extracted canonical concepts,
* affirmation F1 over (concept, affirmed/negated) pairs,
* ROUGE-L F1.

Concept and affirmation scores apply a conservative zero: an example
with no detected concepts on either side scores 0.0 rather than being
skipped, which is why the theoretical maximum of these metrics (gold
scored against itself) can sit below 1.0.

Aggregation is the macro mean of per-example scores by default; the
micro variant (corpus-level summed precision/recall) is available via
``aggregation="micro"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .concepts import ConceptLexicon, extract_concepts, find_mentions
from .negex import NegexRules, tag_affirmations
from .rouge import rouge_l_f1


class EvaluationError(ValueError):
    """Prediction set does not line up with the test set."""


@dataclass(frozen=True)
class ExampleScores:
    sample_id: str
    concept_f1: float
    affirmation_f1: float
    rouge_l_f1: float


@dataclass(frozen=True)
class MetricsReport:
    concept_f1: float
    affirmation_f1: float
    rouge_l_f1: float
    n_examples: int
    per_example: tuple[ExampleScores, ...]
    aggregation: str = "macro"

    def to_dict(self) -> dict:
        return {
            "concept_f1": self.concept_f1,
            "affirmation_f1": self.affirmation_f1,
            "rouge_l_f1": self.rouge_l_f1,
            "n_examples": self.n_examples,
            "aggregation": self.aggregation,
        }


def _pair_f1(predicted: set, reference: set) -> float:
    """F1 over two item sets; conservative 0.0 when either side is empty."""
    if not predicted or not reference:
        return 0.0
    overlap = len(predicted & reference)
    if overlap == 0:
        return 0.0
    precision = overlap / len(predicted)
    recall = overlap / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def concept_f1(predicted_summary: str, reference_summary: str, lexicon: ConceptLexicon) -> float:
    """Concept-set F1 for a single example."""
    return _pair_f1(
        extract_concepts(predicted_summary, lexicon),
        extract_concepts(reference_summary, lexicon),
    )


def _affirmation_pairs(text: str, lexicon: ConceptLexicon, rules: NegexRules) -> set:
    mentions = find_mentions(text, lexicon)
    return {(m.canonical, m.affirmation.value) for m in tag_affirmations(text, mentions, rules)}


def affirmation_f1(
    predicted_summary: str,
    reference_summary: str,
    lexicon: ConceptLexicon,
    rules: NegexRules,
) -> float:
    """(concept, status)-pair F1 for a single example."""
    return _pair_f1(
        _affirmation_pairs(predicted_summary, lexicon, rules),
        _affirmation_pairs(reference_summary, lexicon, rules),
    )


def _micro_f1(pairs: list[tuple[set, set]]) -> float:
    overlap = sum(len(p & r) for p, r in pairs)
    pred_total = sum(len(p) for p, _ in pairs)
    ref_total = sum(len(r) for _, r in pairs)
    if pred_total == 0 or ref_total == 0 or overlap == 0:
        return 0.0
    precision = overlap / pred_total
    recall = overlap / ref_total
    return 2.0 * precision * recall / (precision + recall)


def evaluate(
    predictions: Iterable[tuple[str, str]],
    test_set: Iterable,
    lexicon: ConceptLexicon,
    rules: NegexRules,
    aggregation: str = "macro",
    concept_source: str = "reference",
) -> MetricsReport:
    """Score predictions against a test set.

    ``predictions`` holds (sample_id, summary) pairs and must cover the
    test set exactly. ``test_set`` items need ``id`` and ``gold_summary``
    attributes. Examples are processed in ascending id order so the
    aggregate is independent of input order.

    ``concept_source`` picks the text the reference concept set comes
    from: the reference summary (default, matching the precision/recall
    formulas) or the full conversation (``"conversation"``; requires
    samples with turns). ROUGE-L always scores against the reference
    summary.
    """
    if aggregation not in ("macro", "micro"):
        raise EvaluationError(f"unknown aggregation {aggregation!r}")
    if concept_source not in ("reference", "conversation"):
        raise EvaluationError(f"unknown concept_source {concept_source!r}")
    by_id = {}
    for sample_id, summary in predictions:
        if sample_id in by_id:
            raise EvaluationError(f"duplicate prediction for id {sample_id!r}")
        by_id[sample_id] = summary
    samples = {s.id: s for s in test_set}
    missing = sorted(set(samples) - set(by_id))
    extra = sorted(set(by_id) - set(samples))
    if missing or extra:
        raise EvaluationError(f"prediction ids mismatch: missing={missing} extra={extra}")

    per_example = []
    concept_sets: list[tuple[set, set]] = []
    affirm_sets: list[tuple[set, set]] = []
    for sample_id in sorted(samples):
        predicted = by_id[sample_id]
        sample = samples[sample_id]
        reference = sample.gold_summary
        if reference is None:
            raise EvaluationError(f"test sample {sample_id!r} has no gold summary")
        if concept_source == "conversation":
            turns = getattr(sample, "turns", None)
            if not turns:
                raise EvaluationError(
                    f"test sample {sample_id!r} has no turns for conversation-sourced concepts"
                )
            concept_reference = " ".join(t.text for t in turns)
        else:
            concept_reference = reference
        pred_concepts = extract_concepts(predicted, lexicon)
        ref_concepts = extract_concepts(concept_reference, lexicon)
        pred_pairs = _affirmation_pairs(predicted, lexicon, rules)
        ref_pairs = _affirmation_pairs(concept_reference, lexicon, rules)
        concept_sets.append((pred_concepts, ref_concepts))
        affirm_sets.append((pred_pairs, ref_pairs))
        per_example.append(
            ExampleScores(
                sample_id=sample_id,
                concept_f1=_pair_f1(pred_concepts, ref_concepts),
                affirmation_f1=_pair_f1(pred_pairs, ref_pairs),
                rouge_l_f1=rouge_l_f1(predicted, reference),
            )
        )

    n = len(per_example)
    if n == 0:
        raise EvaluationError("empty test set")
    if aggregation == "macro":
        agg_concept = sum(e.concept_f1 for e in per_example) / n
        agg_affirm = sum(e.affirmation_f1 for e in per_example) / n
    else:
        agg_concept = _micro_f1(concept_sets)
        agg_affirm = _micro_f1(affirm_sets)
    agg_rouge = sum(e.rouge_l_f1 for e in per_example) / n
    return MetricsReport(
        concept_f1=agg_concept,
        affirmation_f1=agg_affirm,
        rouge_l_f1=agg_rouge,
        n_examples=n,
        per_example=tuple(per_example),
        aggregation=aggregation,
    )


def theoretical_max(
    test_set: Iterable,
    lexicon: ConceptLexicon,
    rules: NegexRules,
    aggregation: str = "macro",
    concept_source: str = "reference",
) -> MetricsReport:
    """Ceiling of each metric: every gold summary scored against itself.

    Concept and affirmation maxima fall below 1.0 whenever the lexicon
    detects no concept in some reference (conservative zero); ROUGE-L
    is 1.0 on nonempty references.
    """
    samples = list(test_set)
    for s in samples:
        if s.gold_summary is None:
            raise EvaluationError(f"test sample {s.id!r} has no gold summary")
    golds = [(s.id, s.gold_summary) for s in samples]
    return evaluate(golds, samples, lexicon, rules, aggregation, concept_source)
