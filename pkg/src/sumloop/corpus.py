"""Corpus data model and labeled/unlabeled pool lifecycle.

A corpus is one immutable list of conversation samples; pools are index
sets over it. The labeled pool maps sample ids to label records (with
provenance and the iteration they were added); the unlabeled pool is
the complement. Together they always partition the corpus, and label
records are never overwritten.

Corpus files are UTF-8 newline-delimited JSON, one record per line:

    {"id": "...", "turns": [{"speaker": "patient", "text": "..."}, ...],
     "summary": "..."}

``summary`` is optional in the format but required wherever a sample
can be drawn by the simulated expert or scored against gold.

Pool checkpoints are single JSON objects with ``iteration``, ``labeled``
(records sorted by sample id), ``unlabeled`` (sorted ids), and
``rng_seed``, written atomically (temp file + rename) in a canonical
form, so identical states serialize byte-identically.
"""

from __future__ import annotations

import enum
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .rng import SplitMix64, derive_seed


class CorpusError(ValueError):
    """Malformed corpus data or a pool-invariant violation."""


class Speaker(enum.Enum):
    PATIENT = "patient"
    DOCTOR = "doctor"
    OTHER = "other"


class Provenance(enum.Enum):
    GOLD = "gold"
    EXPERT_HUMAN = "expert_human"
    PSEUDO_MODEL = "pseudo_model"


@dataclass(frozen=True)
class Turn:
    speaker: Speaker
    text: str


@dataclass(frozen=True)
class Sample:
    id: str
    turns: tuple[Turn, ...]
    gold_summary: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("sample id must be nonempty")
        if not self.turns:
            raise CorpusError(f"sample {self.id!r} has no turns")
        for turn in self.turns:
            if not turn.text.strip():
                raise CorpusError(f"sample {self.id!r} has an empty turn text")

    def to_record(self) -> dict:
        record: dict = {
            "id": self.id,
            "turns": [{"speaker": t.speaker.value, "text": t.text} for t in self.turns],
        }
        if self.gold_summary is not None:
            record["summary"] = self.gold_summary
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Sample":
        try:
            turns = tuple(
                Turn(Speaker(t["speaker"]), t["text"]) for t in record["turns"]
            )
            return cls(id=record["id"], turns=turns, gold_summary=record.get("summary"))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"bad sample record: {exc}") from exc


@dataclass(frozen=True)
class Corpus:
    samples: tuple[Sample, ...]
    by_id: Mapping[str, Sample] = field(repr=False)

    @classmethod
    def from_samples(cls, samples: Iterable[Sample]) -> "Corpus":
        ordered = tuple(samples)
        index: dict[str, Sample] = {}
        for sample in ordered:
            if sample.id in index:
                raise CorpusError(f"duplicate sample id {sample.id!r}")
            index[sample.id] = sample
        return cls(ordered, index)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def load_corpus(path: str | Path) -> Corpus:
    """Parse a newline-delimited corpus file, preserving record order."""
    samples = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            sample = Sample.from_record(record)
            if sample.id in seen:
                raise CorpusError(f"{path}: line {lineno}: duplicate sample id {sample.id!r}")
            seen.add(sample.id)
            samples.append(sample)
    return Corpus.from_samples(samples)


def _canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    lines = "".join(_canonical_json(s.to_record()) + "\n" for s in corpus)
    _atomic_write(Path(path), lines)


@dataclass(frozen=True)
class LabelRecord:
    sample_id: str
    summary: str
    provenance: Provenance
    iteration_added: int
    confidence_at_selection: float | None = None

    def __post_init__(self) -> None:
        if self.provenance is Provenance.PSEUDO_MODEL and self.confidence_at_selection is None:
            raise CorpusError(
                f"pseudo-label for {self.sample_id!r} must carry its selection confidence"
            )
        if (self.iteration_added == 0) != (self.provenance is Provenance.GOLD):
            raise CorpusError(
                f"label for {self.sample_id!r}: iteration 0 is reserved for the gold seed set"
            )
        if self.iteration_added < 0:
            raise CorpusError(f"label for {self.sample_id!r}: negative iteration")

    def to_record(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "summary": self.summary,
            "provenance": self.provenance.value,
            "iteration_added": self.iteration_added,
            "confidence_at_selection": self.confidence_at_selection,
        }

    @classmethod
    def from_record(cls, record: dict) -> "LabelRecord":
        return cls(
            sample_id=record["sample_id"],
            summary=record["summary"],
            provenance=Provenance(record["provenance"]),
            iteration_added=record["iteration_added"],
            confidence_at_selection=record.get("confidence_at_selection"),
        )


@dataclass(frozen=True)
class PoolState:
    """Labeled/unlabeled partition at one iteration. Immutable snapshot."""

    labeled: Mapping[str, LabelRecord]
    unlabeled: frozenset[str]
    iteration: int
    rng_seed: int

    def __post_init__(self) -> None:
        overlap = set(self.labeled) & self.unlabeled
        if overlap:
            raise CorpusError(f"pools overlap on ids {sorted(overlap)[:5]}")

    @property
    def universe(self) -> frozenset[str]:
        return frozenset(self.labeled) | self.unlabeled

    def commit(self, records: Iterable[LabelRecord], iteration: int) -> "PoolState":
        """Move newly labeled samples from the unlabeled to the labeled pool."""
        new_labeled = dict(self.labeled)
        new_unlabeled = set(self.unlabeled)
        for record in records:
            if record.sample_id in new_labeled:
                raise CorpusError(f"sample {record.sample_id!r} is already labeled")
            if record.sample_id not in new_unlabeled:
                raise CorpusError(f"sample {record.sample_id!r} is not in the unlabeled pool")
            new_labeled[record.sample_id] = record
            new_unlabeled.remove(record.sample_id)
        return PoolState(new_labeled, frozenset(new_unlabeled), iteration, self.rng_seed)

    def to_record(self) -> dict:
        return {
            "iteration": self.iteration,
            "rng_seed": self.rng_seed,
            "labeled": [
                self.labeled[sid].to_record() for sid in sorted(self.labeled)
            ],
            "unlabeled": sorted(self.unlabeled),
        }

    @classmethod
    def from_record(cls, record: dict) -> "PoolState":
        labeled = {r["sample_id"]: LabelRecord.from_record(r) for r in record["labeled"]}
        return cls(
            labeled=labeled,
            unlabeled=frozenset(record["unlabeled"]),
            iteration=record["iteration"],
            rng_seed=record["rng_seed"],
        )

    def serialize(self) -> str:
        return _canonical_json(self.to_record()) + "\n"


def write_pool(pool: PoolState, path: str | Path) -> None:
    _atomic_write(Path(path), pool.serialize())


def read_pool(path: str | Path) -> PoolState:
    return PoolState.from_record(json.loads(Path(path).read_text(encoding="utf-8")))


def split_pools(corpus: Corpus, l0_size: int, seed: int) -> PoolState:
    """Draw the seed labeled set uniformly and leave the rest unlabeled.

    Selection is a Fisher-Yates shuffle of the ids in corpus order under
    the "pool-split" substream of ``seed``, then a prefix take, so equal
    (corpus, l0_size, seed) always produce the same split.
    """
    if not 0 < l0_size < len(corpus):
        raise CorpusError(
            f"l0_size must be in (0, {len(corpus)}) so an unlabeled pool remains; got {l0_size}"
        )
    missing = [s.id for s in corpus if s.gold_summary is None]
    if missing:
        raise CorpusError(
            f"{len(missing)} samples lack gold summaries (first: {missing[0]!r}); "
            "the simulated expert and test evaluation require them"
        )
    ids = [s.id for s in corpus]
    SplitMix64(derive_seed(seed, "pool-split")).shuffle(ids)
    labeled = {
        sid: LabelRecord(
            sample_id=sid,
            summary=corpus.by_id[sid].gold_summary,
            provenance=Provenance.GOLD,
            iteration_added=0,
        )
        for sid in ids[:l0_size]
    }
    return PoolState(labeled, frozenset(ids[l0_size:]), 0, seed)


def reveal_gold(
    pool: PoolState, corpus: Corpus, ids: Iterable[str], iteration: int
) -> list[LabelRecord]:
    """Simulated expert labeling: surface held-out gold summaries.

    Returns the expert records without mutating the pool; the loop
    engine commits them.
    """
    records = []
    for sid in ids:
        if sid not in pool.unlabeled:
            raise CorpusError(f"sample {sid!r} is not in the unlabeled pool")
        sample = corpus.by_id.get(sid)
        if sample is None:
            raise CorpusError(f"sample {sid!r} is not in the corpus")
        if sample.gold_summary is None:
            raise CorpusError(f"sample {sid!r} has no gold summary to reveal")
        records.append(
            LabelRecord(
                sample_id=sid,
                summary=sample.gold_summary,
                provenance=Provenance.EXPERT_HUMAN,
                iteration_added=iteration,
            )
        )
    return records
