import pytest

from sumloop.corpus import Corpus, Sample, Speaker, Turn
from sumloop.metrics import ConceptLexicon, NegexRules


def make_sample(sample_id: str, patient_text: str, summary: str | None) -> Sample:
    return Sample(
        id=sample_id,
        turns=(
            Turn(Speaker.PATIENT, patient_text),
            Turn(Speaker.DOCTOR, "thanks for the details, let me take a look"),
        ),
        gold_summary=summary,
    )


def make_corpus(n: int, prefix: str = "s") -> Corpus:
    width = len(str(n - 1))
    return Corpus.from_samples(
        make_sample(f"{prefix}{i:0{width}d}", f"i have had a fever since day {i}", f"patient reports fever day {i}")
        for i in range(n)
    )


@pytest.fixture(scope="session")
def demo_lexicon() -> ConceptLexicon:
    from importlib import resources

    with resources.as_file(resources.files("sumloop.data") / "lexicon.tsv") as p:
        return ConceptLexicon.load(p)


@pytest.fixture(scope="session")
def default_rules() -> NegexRules:
    return NegexRules.default()
