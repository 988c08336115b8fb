import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumloop.metrics import lcs_token_length, rouge_l_f1
from sumloop.metrics._kernels import _lcs_length_numpy, _lcs_length_scalar, lcs_length
from sumloop.rng import SplitMix64
from sumloop.textutil import tokenize

from tests.lcs_oracle import lcs_brute_force


class TestTokenize:
    def test_lowercases_and_splits_on_nonalnum(self):
        assert tokenize("Patient: has Fever, 38.5C!") == ["patient", "has", "fever", "38", "5c"]

    def test_underscore_separates(self):
        assert tokenize("a_b") == ["a", "b"]

    def test_empty(self):
        assert tokenize("  ...  ") == []


class TestRougeL:
    def test_identity_is_one(self):
        assert rouge_l_f1("the cat sat on the mat", "the cat sat on the mat") == 1.0

    def test_disjoint_is_zero(self):
        assert rouge_l_f1("alpha beta", "gamma delta") == 0.0

    def test_either_side_empty_is_zero(self):
        assert rouge_l_f1("", "the cat") == 0.0
        assert rouge_l_f1("the cat", "") == 0.0

    def test_the_cat_sat_vs_ran(self):
        # LCS("the cat sat", "the cat ran") = 2, P = R = 2/3, F1 = 2/3.
        assert rouge_l_f1("the cat sat", "the cat ran") == pytest.approx(2 / 3)

    def test_accepts_pretokenized_sequences(self):
        assert rouge_l_f1(["a", "b", "c"], ["a", "b", "c"]) == 1.0

    def test_tokenization_is_applied(self):
        assert rouge_l_f1("The CAT!", "the cat") == 1.0


def _random_pair(rng, vocab_size=8, max_len=12):
    vocab = [f"w{k}" for k in range(vocab_size)]
    a = [vocab[rng.below(vocab_size)] for _ in range(rng.below(max_len + 1))]
    b = [vocab[rng.below(vocab_size)] for _ in range(rng.below(max_len + 1))]
    return a, b


def test_lcs_matches_brute_force_on_random_pairs():
    rng = SplitMix64(2024)
    for _ in range(300):
        a, b = _random_pair(rng)
        assert lcs_token_length(a, b) == lcs_brute_force(a, b), (a, b)


def test_numpy_and_scalar_kernels_agree():
    rng = SplitMix64(99)
    for _ in range(200):
        a = np.array([rng.below(6) for _ in range(rng.below(30))], dtype=np.int32)
        b = np.array([rng.below(6) for _ in range(rng.below(30))], dtype=np.int32)
        assert _lcs_length_numpy(a, b) == _lcs_length_scalar(a, b)
        assert lcs_length(a, b) == _lcs_length_scalar(a, b)


token_lists = st.lists(st.sampled_from(["a", "b", "c", "d", "e"]), max_size=12)


@settings(max_examples=300, deadline=None)
@given(a=token_lists, b=token_lists)
def test_f1_symmetric_in_candidate_and_reference(a, b):
    assert rouge_l_f1(a, b) == pytest.approx(rouge_l_f1(b, a))


@settings(max_examples=300, deadline=None)
@given(a=token_lists, b=token_lists)
def test_score_in_unit_interval_and_matches_oracle(a, b):
    score = rouge_l_f1(a, b)
    assert 0.0 <= score <= 1.0
    lcs = lcs_brute_force(a, b)
    if lcs == 0 or not a or not b:
        assert score == 0.0
    else:
        p, r = lcs / len(a), lcs / len(b)
        assert score == pytest.approx(2 * p * r / (p + r))
