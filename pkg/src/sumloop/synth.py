"""Synthetic conversation corpus with controllable concept density.

Generated samples look like short patient-doctor chats whose gold
summaries name the sampled concepts through their lexicon surface
forms, with negated concepts phrased after affirmed ones ("patient
reports X and Y. denies Z.") so the negation tagger scores gold
summaries exactly as written. A configurable, exact fraction of
samples carries no lexicon concept at all, which is what drags the
theoretical maximum of concept/affirmation F1 below 1.0.

Generation is a pure function of (n, seed, knobs): the same arguments
always produce byte-identical corpora.
"""

from __future__ import annotations

from .corpus import Corpus, Sample, Speaker, Turn
from .metrics import ConceptLexicon, extract_concepts
from .rng import SplitMix64, derive_seed

_FILLER_OPENERS = (
    "i wanted to check in about my upcoming appointment",
    "i had some questions about my paperwork",
    "i am calling to confirm my visit for next week",
    "i need to update my contact details",
    "i wanted to ask about clinic opening hours",
)

_ZERO_CONCEPT_SUMMARIES = (
    "patient called to confirm an upcoming appointment.",
    "patient asked administrative questions only.",
    "patient requested a records update, nothing clinical discussed.",
    "patient inquired about scheduling, no complaints raised.",
)

_DOCTOR_PROMPTS = (
    "what brings you in today",
    "can you tell me more about that",
    "how long has this been going on",
    "anything else you want to mention",
)


def _surface_pool(lexicon: ConceptLexicon) -> list[tuple[str, str]]:
    """(canonical, surface text) pairs, deterministic order."""
    pool = [
        (canonical, " ".join(surface))
        for surface, canonical in lexicon.surface_to_canonical.items()
    ]
    pool.sort()
    return pool


def default_lexicon() -> ConceptLexicon:
    from importlib import resources

    with resources.as_file(resources.files("sumloop.data") / "lexicon.tsv") as p:
        return ConceptLexicon.load(p)


def generate_corpus(
    n: int,
    seed: int,
    lexicon: ConceptLexicon | None = None,
    zero_concept_fraction: float = 0.0,
    max_concepts: int = 3,
    negated_probability: float = 0.3,
    id_prefix: str = "synth",
) -> Corpus:
    if n <= 0:
        raise ValueError(f"n must be > 0, got {n}")
    if not 0.0 <= zero_concept_fraction <= 1.0:
        raise ValueError("zero_concept_fraction must be in [0, 1]")
    if max_concepts < 1:
        raise ValueError("max_concepts must be >= 1")
    lexicon = lexicon or default_lexicon()
    pool = _surface_pool(lexicon)

    # Exact zero-concept count, positions drawn by seeded shuffle.
    zero_count = round(n * zero_concept_fraction)
    indices = list(range(n))
    SplitMix64(derive_seed(seed, "synth-zero-slots")).shuffle(indices)
    zero_slots = set(indices[:zero_count])

    width = len(str(n - 1))
    samples = []
    for i in range(n):
        sample_id = f"{id_prefix}{i:0{width}d}"
        rng = SplitMix64(derive_seed(seed, "synth-sample", sample_id))
        if i in zero_slots:
            samples.append(_zero_concept_sample(sample_id, rng, lexicon))
        else:
            samples.append(
                _concept_sample(sample_id, rng, pool, max_concepts, negated_probability)
            )
    return Corpus.from_samples(samples)


def _pick_distinct_concepts(rng: SplitMix64, pool, count: int):
    picked = []
    seen = set()
    while len(picked) < count:
        canonical, surface = pool[rng.below(len(pool))]
        if canonical in seen:
            continue
        seen.add(canonical)
        picked.append((canonical, surface))
    return picked


def _concept_sample(sample_id, rng, pool, max_concepts, negated_probability) -> Sample:
    count = 1 + rng.below(max_concepts)
    concepts = _pick_distinct_concepts(rng, pool, count)
    affirmed = []
    negated = []
    for _, surface in concepts:
        (negated if rng.uniform() < negated_probability else affirmed).append(surface)
    if not affirmed and not negated:
        affirmed.append(concepts[0][1])

    day = 1 + rng.below(14)
    patient_bits = [f"i have been dealing with {s} for {day} days" for s in affirmed]
    patient_bits += [f"i am sure i do not have {s}" for s in negated]
    turns = (
        Turn(Speaker.DOCTOR, _DOCTOR_PROMPTS[rng.below(len(_DOCTOR_PROMPTS))]),
        Turn(Speaker.PATIENT, " and ".join(patient_bits)),
        Turn(Speaker.DOCTOR, "thank you, i will note all of that down"),
    )

    # Affirmed clauses first, negated after, so "denies" scopes cannot
    # reach back over affirmed mentions once punctuation is tokenized
    # away; one "denies" per negated concept keeps every negated mention
    # adjacent to its trigger regardless of surface length.
    parts = []
    if affirmed:
        parts.append("patient reports " + " and ".join(affirmed) + ".")
    parts.extend(f"denies {s}." for s in negated)
    return Sample(id=sample_id, turns=turns, gold_summary=" ".join(parts))


def _zero_concept_sample(sample_id, rng, lexicon) -> Sample:
    opener = _FILLER_OPENERS[rng.below(len(_FILLER_OPENERS))]
    summary = _ZERO_CONCEPT_SUMMARIES[rng.below(len(_ZERO_CONCEPT_SUMMARIES))]
    if extract_concepts(opener, lexicon) or extract_concepts(summary, lexicon):
        raise ValueError(
            "filler text collides with a lexicon surface form; "
            "adjust the filler phrases or the lexicon"
        )
    turns = (
        Turn(Speaker.DOCTOR, _DOCTOR_PROMPTS[rng.below(len(_DOCTOR_PROMPTS))]),
        Turn(Speaker.PATIENT, opener),
        Turn(Speaker.DOCTOR, "happy to help with that"),
    )
    return Sample(id=sample_id, turns=turns, gold_summary=summary)
