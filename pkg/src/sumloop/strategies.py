"""Confidence-ranked selection of samples for pseudo- and expert-labeling.

Selections are rank statistics over a score table (one confidence score
per unlabeled sample, higher = the model expects to do better):

* ``top``    - the ``budget`` highest-scoring ids (pseudo-labeling picks
               what the model is likely to get right),
* ``bottom`` - the ``budget`` lowest (expert labeling picks what the
               model is likely to get wrong),
* ``middle`` - the ``budget`` ids whose ranks sit centered on the median
               of the ascending sort: ranks ``(n-budget)//2`` through
               ``(n-budget)//2 + budget - 1``,
* ``random`` - a seeded uniform draw without replacement,
* ``none``   - the empty selection.

All orderings sort ascending by (score, sample_id), so ties break
deterministically by id. Budgets are fixed counts computed once from
the initial unlabeled pool size.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .rng import SplitMix64, derive_seed


class StrategyError(ValueError):
    """Invalid strategy parameters."""


class SelectionKind(enum.Enum):
    NONE = "none"
    TOP = "top"
    BOTTOM = "bottom"
    MIDDLE = "middle"
    RANDOM = "random"


PL_KINDS = (SelectionKind.NONE, SelectionKind.TOP)
HL_KINDS = (
    SelectionKind.NONE,
    SelectionKind.TOP,
    SelectionKind.BOTTOM,
    SelectionKind.MIDDLE,
    SelectionKind.RANDOM,
)


class ScoreNormalization(enum.Enum):
    NONE = "none"
    PER_TOKEN = "per_token"


@dataclass(frozen=True)
class ScoreEntry:
    sample_id: str
    score: float
    token_count: int


@dataclass(frozen=True)
class ScoreTable:
    entries: tuple[ScoreEntry, ...]
    normalization: ScoreNormalization = ScoreNormalization.NONE

    def __post_init__(self) -> None:
        ids = [e.sample_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise StrategyError("score table has duplicate sample ids")
        for e in self.entries:
            if not math.isfinite(e.score):
                raise StrategyError(f"non-finite score for {e.sample_id!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def ranking_scores(self) -> list[tuple[str, float]]:
        """(id, effective score) pairs under the table's normalization."""
        if self.normalization is ScoreNormalization.PER_TOKEN:
            return [(e.sample_id, e.score / max(e.token_count, 1)) for e in self.entries]
        return [(e.sample_id, e.score) for e in self.entries]


@dataclass(frozen=True)
class StrategySpec:
    pl: SelectionKind = SelectionKind.NONE
    hl: SelectionKind = SelectionKind.NONE
    pl_fraction: float = 0.01
    hl_fraction: float = 0.01
    seed: int = 0  # 0 = inherit the run seed

    def __post_init__(self) -> None:
        if self.pl not in PL_KINDS:
            raise StrategyError(f"pseudo-labeling strategy must be none or top, got {self.pl.value}")
        if self.hl not in HL_KINDS:
            raise StrategyError(f"unknown expert-labeling strategy {self.hl}")
        for name, frac in (("pl_fraction", self.pl_fraction), ("hl_fraction", self.hl_fraction)):
            if not 0.0 <= frac <= 1.0:
                raise StrategyError(f"{name} must be in [0, 1], got {frac}")
        if self.pl is SelectionKind.TOP and self.pl_fraction <= 0:
            raise StrategyError("pl=top requires pl_fraction > 0")

    @property
    def is_trivial(self) -> bool:
        return self.pl is SelectionKind.NONE and self.hl is SelectionKind.NONE

    def label(self) -> str:
        return f"pl-{self.pl.value}_hl-{self.hl.value}"


@dataclass(frozen=True)
class Budgets:
    """Per-iteration label counts, frozen from the initial pool size."""

    b_pseudo: int
    b_expert: int

    @classmethod
    def from_spec(cls, spec: StrategySpec, u0_size: int) -> "Budgets":
        b_p = compute_budget(u0_size, spec.pl_fraction) if spec.pl is not SelectionKind.NONE else 0
        b_e = compute_budget(u0_size, spec.hl_fraction) if spec.hl is not SelectionKind.NONE else 0
        return cls(b_p, b_e)


def compute_budget(u0_size: int, fraction: float) -> int:
    """ceil(fraction * u0_size), computed exactly.

    The fraction is interpreted through its decimal representation
    (0.01 means exactly 1/100) so binary float error cannot push the
    ceiling up a step.
    """
    if u0_size < 0:
        raise StrategyError(f"pool size must be >= 0, got {u0_size}")
    if not 0.0 <= fraction <= 1.0:
        raise StrategyError(f"fraction must be in [0, 1], got {fraction}")
    if fraction == 0.0:
        return 0
    return math.ceil(Fraction(str(fraction)) * u0_size)


def select(kind: SelectionKind, scores: ScoreTable, budget: int, seed: int) -> list[str]:
    """Pick ``budget`` sample ids from the score table.

    Rank-based kinds return ids in rank order (top: best first; bottom
    and middle: ascending). Random returns the seeded draw order, using
    the "select-random" substream of ``seed``.
    """
    if budget < 0:
        raise StrategyError(f"budget must be >= 0, got {budget}")
    if budget == 0 or kind is SelectionKind.NONE:
        return []
    if budget > len(scores):
        raise StrategyError(f"budget {budget} exceeds {len(scores)} scored samples")

    ranked = sorted(scores.ranking_scores(), key=lambda pair: (pair[1], pair[0]))
    if kind is SelectionKind.BOTTOM:
        return [sid for sid, _ in ranked[:budget]]
    if kind is SelectionKind.TOP:
        return [sid for sid, _ in reversed(ranked[-budget:])]
    if kind is SelectionKind.MIDDLE:
        start = (len(ranked) - budget) // 2
        return [sid for sid, _ in ranked[start : start + budget]]
    if kind is SelectionKind.RANDOM:
        ids = sorted(sid for sid, _ in ranked)
        return SplitMix64(derive_seed(seed, "select-random")).sample(ids, budget)
    raise StrategyError(f"unknown selection kind {kind}")
