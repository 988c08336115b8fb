"""Evaluation suite: ROUGE-L, concept F1, affirmation F1, theoretical maxima."""

from .concepts import ConceptLexicon, LexiconError, Mention, extract_concepts, find_mentions
from .negex import Affirmation, ConceptMention, NegexRules, RulesError, tag_affirmations
from .report import (
    EvaluationError,
    ExampleScores,
    MetricsReport,
    affirmation_f1,
    concept_f1,
    evaluate,
    theoretical_max,
)
from .rouge import lcs_token_length, rouge_l_f1

__all__ = [
    "Affirmation",
    "ConceptLexicon",
    "ConceptMention",
    "EvaluationError",
    "ExampleScores",
    "LexiconError",
    "Mention",
    "MetricsReport",
    "NegexRules",
    "RulesError",
    "affirmation_f1",
    "concept_f1",
    "evaluate",
    "extract_concepts",
    "find_mentions",
    "lcs_token_length",
    "rouge_l_f1",
    "tag_affirmations",
    "theoretical_max",
]
