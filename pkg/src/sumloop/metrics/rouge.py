"""ROUGE-L F1 over the shared tokenization.

Scores are LCS-based: with L the longest common subsequence length,
precision is L/|candidate|, recall is L/|reference|, and the score is
their harmonic mean. Empty sides and zero-LCS pairs score 0.0.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..textutil import tokenize
from ._kernels import lcs_length


def _as_tokens(value: str | Sequence[str]) -> list[str]:
    if isinstance(value, str):
        return tokenize(value)
    return list(value)


def _encode_pair(a: list[str], b: list[str]) -> tuple[np.ndarray, np.ndarray]:
    ids: dict[str, int] = {}
    for tok in a:
        ids.setdefault(tok, len(ids))
    for tok in b:
        ids.setdefault(tok, len(ids))
    enc_a = np.fromiter((ids[t] for t in a), dtype=np.int32, count=len(a))
    enc_b = np.fromiter((ids[t] for t in b), dtype=np.int32, count=len(b))
    return enc_a, enc_b


def lcs_token_length(candidate: str | Sequence[str], reference: str | Sequence[str]) -> int:
    """Length of the longest common subsequence of the two token streams."""
    a, b = _as_tokens(candidate), _as_tokens(reference)
    if not a or not b:
        return 0
    enc_a, enc_b = _encode_pair(a, b)
    return lcs_length(enc_a, enc_b)


def rouge_l_f1(candidate: str | Sequence[str], reference: str | Sequence[str]) -> float:
    """ROUGE-L F1 of a candidate against a reference.

    Accepts raw strings (tokenized with the package rule) or
    pre-tokenized sequences.
    """
    a, b = _as_tokens(candidate), _as_tokens(reference)
    if not a or not b:
        return 0.0
    lcs = lcs_token_length(a, b)
    if lcs == 0:
        return 0.0
    precision = lcs / len(a)
    recall = lcs / len(b)
    return 2.0 * precision * recall / (precision + recall)
