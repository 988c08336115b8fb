import pytest

from sumloop.metrics import ConceptLexicon, LexiconError, extract_concepts, find_mentions


@pytest.fixture
def mini_lexicon():
    return ConceptLexicon.from_entries(
        {
            "fever": ["fever"],
            "cough": ["cough", "dry cough"],
            "headache": ["headache"],
        }
    )


class TestExtraction:
    def test_longest_match_wins(self, mini_lexicon):
        # "dry cough" must be consumed as the two-token surface, not as
        # bare "cough" with a stray "dry".
        mentions = find_mentions("patient reports fever and dry cough", mini_lexicon)
        assert [(m.canonical, m.start, m.end) for m in mentions] == [
            ("fever", 2, 3),
            ("cough", 4, 6),
        ]
        assert extract_concepts("patient reports fever and dry cough", mini_lexicon) == {
            "fever",
            "cough",
        }

    def test_empty_text(self, mini_lexicon):
        assert extract_concepts("", mini_lexicon) == set()

    def test_whole_token_matching(self, mini_lexicon):
        assert extract_concepts("feeling feverish", mini_lexicon) == set()

    def test_case_insensitive(self, mini_lexicon):
        assert extract_concepts("FEVER and Dry COUGH", mini_lexicon) == {"fever", "cough"}

    def test_deduplicates(self, mini_lexicon):
        assert extract_concepts("fever fever fever", mini_lexicon) == {"fever"}

    def test_non_overlapping_scan(self, mini_lexicon):
        # After consuming "dry cough", scanning resumes past it.
        mentions = find_mentions("dry cough dry cough", mini_lexicon)
        assert [(m.start, m.end) for m in mentions] == [(0, 2), (2, 4)]

    def test_pure_function_of_inputs(self, mini_lexicon):
        text = "fever and dry cough but no headache"
        assert find_mentions(text, mini_lexicon) == find_mentions(text, mini_lexicon)


class TestLexiconLoading:
    def test_ambiguous_surface_rejected(self):
        with pytest.raises(LexiconError, match="maps to both"):
            ConceptLexicon.from_entries({"a": ["fever"], "b": ["fever"]})

    def test_empty_surface_rejected(self):
        with pytest.raises(LexiconError, match="empty surface"):
            ConceptLexicon.from_entries({"a": ["!!!"]})

    def test_same_surface_under_same_canonical_is_fine(self):
        lex = ConceptLexicon.from_entries({"a": ["fever", "Fever"]})
        assert lex.canonical_concepts == {"a"}

    def test_file_format(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text(
            "# comment\nfever\tfever\tfebrile\ncough\n", encoding="utf-8"
        )
        lex = ConceptLexicon.load(path)
        assert extract_concepts("febrile with cough", lex) == {"fever", "cough"}

    def test_duplicate_canonical_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("fever\tfever\nfever\tfebrile\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="line 2"):
            ConceptLexicon.load(path)


def test_shipped_demo_lexicon_loads_and_is_unambiguous(demo_lexicon):
    # from_entries would have raised on any cross-concept surface clash.
    assert len(demo_lexicon.canonical_concepts) >= 200
    assert extract_concepts("hay fever", demo_lexicon) == {"allergic_rhinitis"}
    assert extract_concepts("high blood pressure and gout", demo_lexicon) == {
        "hypertension",
        "gout",
    }
