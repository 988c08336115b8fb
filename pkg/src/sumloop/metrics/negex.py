"""Rule-based negation tagging for extracted concept mentions.

A mention is tagged ``negated`` when a pre-negation trigger ends within
``scope_window`` tokens immediately before it (or a post-negation
trigger starts within ``scope_window`` tokens immediately after it),
no termination term lies between trigger and mention, and the trigger
occurrence is not contained in a pseudo-negation phrase ("no increase"
does not negate). Everything else is ``affirmed``.

Rules file format (UTF-8 TSV, ``#`` comments): ``category<TAB>phrase``
with categories ``pre``, ``post``, ``pseudo``, ``term``. Phrases are
normalized with the shared tokenization; the same phrase may not appear
in two categories.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..textutil import tokenize
from .concepts import Mention

_CATEGORIES = ("pre", "post", "pseudo", "term")


class RulesError(ValueError):
    """Malformed negation rules data."""


class Affirmation(enum.Enum):
    AFFIRMED = "affirmed"
    NEGATED = "negated"


@dataclass(frozen=True)
class ConceptMention:
    """A concept occurrence with its negation status."""

    canonical: str
    affirmation: Affirmation
    start: int
    end: int


@dataclass(frozen=True)
class NegexRules:
    pre_negation: frozenset[tuple[str, ...]]
    post_negation: frozenset[tuple[str, ...]]
    pseudo_negation: frozenset[tuple[str, ...]]
    termination: frozenset[tuple[str, ...]]
    scope_window: int = 5

    def __post_init__(self) -> None:
        if self.scope_window < 1:
            raise RulesError("scope_window must be >= 1")
        groups = {
            "pre": self.pre_negation,
            "post": self.post_negation,
            "pseudo": self.pseudo_negation,
            "term": self.termination,
        }
        seen: dict[tuple[str, ...], str] = {}
        for name, phrases in groups.items():
            for phrase in phrases:
                if phrase in seen:
                    raise RulesError(
                        f"phrase {' '.join(phrase)!r} appears in both "
                        f"{seen[phrase]!r} and {name!r}"
                    )
                seen[phrase] = name

    @classmethod
    def from_phrases(
        cls,
        pre: list[str],
        post: list[str] | None = None,
        pseudo: list[str] | None = None,
        term: list[str] | None = None,
        scope_window: int = 5,
    ) -> "NegexRules":
        def norm(phrases: list[str] | None) -> frozenset[tuple[str, ...]]:
            out = set()
            for p in phrases or []:
                toks = tuple(tokenize(p))
                if not toks:
                    raise RulesError(f"empty phrase {p!r}")
                out.add(toks)
            return frozenset(out)

        return cls(norm(pre), norm(post), norm(pseudo), norm(term), scope_window)

    @classmethod
    def load(cls, path: str | Path, scope_window: int = 5) -> "NegexRules":
        buckets: dict[str, list[str]] = {c: [] for c in _CATEGORIES}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2 or parts[0] not in _CATEGORIES:
                raise RulesError(f"line {lineno}: expected 'pre|post|pseudo|term<TAB>phrase'")
            buckets[parts[0]].append(parts[1].strip())
        return cls.from_phrases(
            buckets["pre"], buckets["post"], buckets["pseudo"], buckets["term"], scope_window
        )

    @classmethod
    def default(cls, scope_window: int = 5) -> "NegexRules":
        with resources.as_file(resources.files("sumloop.data") / "negex_rules.tsv") as p:
            return cls.load(p, scope_window)


@dataclass
class _Occurrence:
    start: int
    end: int


def _find_occurrences(tokens: list[str], phrases: frozenset[tuple[str, ...]]) -> list[_Occurrence]:
    found = []
    for phrase in phrases:
        k = len(phrase)
        for i in range(len(tokens) - k + 1):
            if tuple(tokens[i : i + k]) == phrase:
                found.append(_Occurrence(i, i + k))
    return found


def _inside_pseudo(occ: _Occurrence, pseudos: list[_Occurrence]) -> bool:
    return any(p.start <= occ.start and occ.end <= p.end for p in pseudos)


def _terminated(terms: list[_Occurrence], lo: int, hi: int) -> bool:
    return any(lo <= t.start and t.end <= hi for t in terms)


def tag_affirmations(
    text: str, mentions: list[Mention], rules: NegexRules
) -> list[ConceptMention]:
    """Attach an affirmed/negated status to each extracted mention."""
    tokens = tokenize(text)
    pres = _find_occurrences(tokens, rules.pre_negation)
    posts = _find_occurrences(tokens, rules.post_negation)
    pseudos = _find_occurrences(tokens, rules.pseudo_negation)
    terms = _find_occurrences(tokens, rules.termination)

    tagged = []
    for mention in mentions:
        negated = False
        for trig in pres:
            if trig.end > mention.start:
                continue
            if mention.start - trig.end > rules.scope_window - 1:
                continue
            if _inside_pseudo(trig, pseudos):
                continue
            if _terminated(terms, trig.end, mention.start):
                continue
            negated = True
            break
        if not negated:
            for trig in posts:
                if trig.start < mention.end:
                    continue
                if trig.start - mention.end > rules.scope_window - 1:
                    continue
                if _inside_pseudo(trig, pseudos):
                    continue
                if _terminated(terms, mention.end, trig.start):
                    continue
                negated = True
                break
        status = Affirmation.NEGATED if negated else Affirmation.AFFIRMED
        tagged.append(ConceptMention(mention.canonical, status, mention.start, mention.end))
    return tagged
