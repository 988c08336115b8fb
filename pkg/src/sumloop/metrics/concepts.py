"""Dictionary-based medical concept extraction.

A lexicon maps canonical concepts to surface forms (token sequences,
matched case-insensitively on whole tokens). Extraction is a greedy
longest-match, non-overlapping, left-to-right scan over the shared
tokenization, so "dry cough" beats "cough" when both are listed.

Lexicon file format (UTF-8 TSV, ``#`` starts a comment line):

    canonical<TAB>surface1<TAB>surface2...

A canonical with no listed surfaces uses itself as its only surface.
A surface form appearing under two canonicals is rejected at load.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..textutil import tokenize


class LexiconError(ValueError):
    """Malformed or ambiguous lexicon data."""


@dataclass(frozen=True)
class ConceptLexicon:
    """Surface-form index: token tuple -> canonical concept."""

    surface_to_canonical: dict[tuple[str, ...], str]
    max_surface_len: int

    @classmethod
    def from_entries(cls, entries: dict[str, list[str]]) -> "ConceptLexicon":
        index: dict[tuple[str, ...], str] = {}
        for canonical, surfaces in entries.items():
            forms = surfaces if surfaces else [canonical]
            for surface in forms:
                toks = tuple(tokenize(surface))
                if not toks:
                    raise LexiconError(f"empty surface form for concept {canonical!r}")
                owner = index.get(toks)
                if owner is not None and owner != canonical:
                    raise LexiconError(
                        f"surface form {' '.join(toks)!r} maps to both "
                        f"{owner!r} and {canonical!r}"
                    )
                index[toks] = canonical
        if not index:
            raise LexiconError("lexicon has no entries")
        return cls(index, max(len(t) for t in index))

    @classmethod
    def load(cls, path: str | Path) -> "ConceptLexicon":
        entries: dict[str, list[str]] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split("\t") if f.strip()]
            if not fields:
                continue
            canonical = fields[0]
            if canonical in entries:
                raise LexiconError(f"line {lineno}: duplicate canonical concept {canonical!r}")
            entries[canonical] = fields[1:] or [canonical]
        return cls.from_entries(entries)

    @property
    def canonical_concepts(self) -> set[str]:
        return set(self.surface_to_canonical.values())


@dataclass(frozen=True)
class Mention:
    """One matched concept occurrence, with token-offset span [start, end)."""

    canonical: str
    start: int
    end: int


def find_mentions(text: str, lexicon: ConceptLexicon) -> list[Mention]:
    """All non-overlapping longest-match concept occurrences, in order."""
    tokens = tokenize(text)
    mentions: list[Mention] = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = False
        for length in range(min(lexicon.max_surface_len, n - i), 0, -1):
            canonical = lexicon.surface_to_canonical.get(tuple(tokens[i : i + length]))
            if canonical is not None:
                mentions.append(Mention(canonical, i, i + length))
                i += length
                matched = True
                break
        if not matched:
            i += 1
    return mentions


def extract_concepts(text: str, lexicon: ConceptLexicon) -> set[str]:
    """Deduplicated canonical concepts found in the text."""
    return {m.canonical for m in find_mentions(text, lexicon)}
