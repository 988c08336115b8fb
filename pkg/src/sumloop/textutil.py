"""Shared tokenization.

One tokenization rule is used everywhere a metric or adapter counts
tokens, so results are bit-reproducible: lowercase the text, then take
maximal runs of Unicode alphanumeric characters (underscore excluded).
Punctuation, whitespace, and symbols separate tokens and are dropped.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric-run tokens, in order."""
    return _TOKEN_RE.findall(text.lower())
