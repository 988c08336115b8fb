"""Black-box summarization model boundary.

An adapter owns two operations: FIT a model on the current labeled set,
then PREDICT summaries with sequence log-likelihoods for unlabeled
samples. The loop engine never sees model internals, only
``ModelHandle`` and ``Prediction`` values, so external summarizers plug
in over the wire protocol (see ``sumloop.wire``) while two built-in
reference models keep experiments self-contained and deterministic:

* ``oracle_noise`` corrupts the gold summary token-by-token at a
  configurable rate and reports ``log_likelihood = -rate * token_count``.
  With ``curve_c`` set, the rate decays as
  ``rate * curve_c / (curve_c + n_fitted)`` so skill grows with the
  labeled-set size.

  Corruption rule (fixed; tests recompute it): tokenize the gold
  summary; per token draw u then v from the sample's own substream
  ("oracle-noise", sample_id, seeded by the fit seed), consuming both
  draws for every token so runs at different rates corrupt nested
  token sets (common random numbers; this is what makes metric curves
  across a rate sweep monotone rather than merely monotone in
  expectation). u >= rate keeps the token; otherwise v < 0.5 drops it
  and v >= 0.5 replaces it with "noise". If nothing was corrupted the
  original summary is returned verbatim; if every token was dropped
  the output is the single token "noise".

* ``extractive_lead`` joins the first k patient turns (all turns as a
  fallback when a conversation has no patient turn) and scores
  ``-(fraction of summary tokens outside the fit-time summary
  vocabulary) * token_count``.

Both are deterministic functions of (run_id, seed, inputs).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

from .corpus import LabelRecord, Sample
from .rng import SplitMix64, derive_seed
from .textutil import tokenize
from .wire import ProtocolError

REPLACEMENT_TOKEN = "noise"


class AdapterError(RuntimeError):
    """Adapter process failed outside the wire contract (spawn, exit, timeout)."""


class AdapterKind(enum.Enum):
    EXTERNAL_PROCESS = "external_process"
    ORACLE_NOISE = "oracle_noise"
    EXTRACTIVE_LEAD = "extractive_lead"


@dataclass(frozen=True)
class ModelHyperparams:
    dropout: float = 0.1
    epochs: int = 6
    effective_batch_size: int = 128
    extra: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.dropout <= 1.0:
            raise ValueError(f"dropout must be in [0, 1], got {self.dropout}")
        if self.epochs <= 0:
            raise ValueError(f"epochs must be > 0, got {self.epochs}")
        if self.effective_batch_size <= 0:
            raise ValueError(f"effective_batch_size must be > 0, got {self.effective_batch_size}")

    def to_wire(self) -> dict:
        return {
            "dropout": self.dropout,
            "epochs": self.epochs,
            "effective_batch_size": self.effective_batch_size,
            "extra": dict(self.extra),
        }


@dataclass(frozen=True)
class ModelHandle:
    run_id: str
    adapter_kind: AdapterKind
    fitted_on_count: int
    state: Any = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    summary: str
    log_likelihood: float
    token_count: int


class ModelAdapter(Protocol):
    kind: AdapterKind

    def fit(
        self,
        labeled: Sequence[tuple[Sample, LabelRecord]],
        hp: ModelHyperparams,
        run_id: str,
        seed: int,
    ) -> ModelHandle: ...

    def predict(self, handle: ModelHandle, samples: Sequence[Sample]) -> list[Prediction]: ...

    def close(self) -> None: ...


def _check_fit_inputs(labeled: Sequence[tuple[Sample, LabelRecord]]) -> None:
    if not labeled:
        raise ValueError("fit requires a nonempty labeled set")
    for sample, record in labeled:
        if not record.summary.strip():
            raise ValueError(f"labeled sample {sample.id!r} has an empty summary")


class OracleNoiseAdapter:
    """Gold-summary oracle with seeded token corruption."""

    kind = AdapterKind.ORACLE_NOISE

    def __init__(self, rate: float = 0.3, curve_c: float | None = None) -> None:
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"noise rate must be in [0, 1], got {rate}")
        if curve_c is not None and curve_c <= 0:
            raise ValueError(f"curve_c must be > 0, got {curve_c}")
        self.rate = rate
        self.curve_c = curve_c

    def effective_rate(self, fitted_on_count: int) -> float:
        if self.curve_c is None:
            return self.rate
        return self.rate * self.curve_c / (self.curve_c + fitted_on_count)

    def fit(self, labeled, hp, run_id, seed):
        _check_fit_inputs(labeled)
        rate = self.effective_rate(len(labeled))
        return ModelHandle(run_id, self.kind, len(labeled), state={"rate": rate, "seed": seed})

    def predict(self, handle, samples):
        if handle.adapter_kind is not self.kind or handle.state is None:
            raise ValueError("handle was not produced by this adapter's fit")
        if not samples:
            raise ValueError("predict requires a nonempty sample batch")
        rate = handle.state["rate"]
        seed = handle.state["seed"]
        out = []
        for sample in samples:
            if sample.gold_summary is None:
                raise ValueError(f"oracle adapter needs a gold summary for {sample.id!r}")
            summary, token_count = corrupt_summary(sample.gold_summary, rate, seed, sample.id)
            out.append(Prediction(sample.id, summary, -rate * token_count, token_count))
        return out

    def close(self) -> None:
        pass


def corrupt_summary(
    gold_summary: str, rate: float, seed: int, sample_id: str
) -> tuple[str, int]:
    """Apply the documented corruption rule; returns (summary, token_count)."""
    tokens = tokenize(gold_summary)
    rng = SplitMix64(derive_seed(seed, "oracle-noise", sample_id))
    kept: list[str] = []
    corrupted = False
    for token in tokens:
        u, v = rng.uniform(), rng.uniform()
        if u >= rate:
            kept.append(token)
            continue
        corrupted = True
        if v >= 0.5:
            kept.append(REPLACEMENT_TOKEN)
    if not corrupted:
        return gold_summary, max(1, len(tokens))
    if not kept:
        kept = [REPLACEMENT_TOKEN]
    return " ".join(kept), len(kept)


class ExtractiveLeadAdapter:
    """Non-oracle baseline: first k patient turns, vocabulary-gap scoring."""

    kind = AdapterKind.EXTRACTIVE_LEAD

    def __init__(self, k: int = 2) -> None:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k

    def fit(self, labeled, hp, run_id, seed):
        _check_fit_inputs(labeled)
        vocabulary = frozenset(
            token for _, record in labeled for token in tokenize(record.summary)
        )
        return ModelHandle(run_id, self.kind, len(labeled), state={"vocab": vocabulary})

    def predict(self, handle, samples):
        if handle.adapter_kind is not self.kind or handle.state is None:
            raise ValueError("handle was not produced by this adapter's fit")
        if not samples:
            raise ValueError("predict requires a nonempty sample batch")
        vocab = handle.state["vocab"]
        out = []
        for sample in samples:
            summary = self.lead_summary(sample)
            tokens = tokenize(summary)
            token_count = max(1, len(tokens))
            unknown = sum(1 for t in tokens if t not in vocab)
            fraction = unknown / len(tokens) if tokens else 0.0
            out.append(Prediction(sample.id, summary, -fraction * token_count, token_count))
        return out

    def lead_summary(self, sample: Sample) -> str:
        from .corpus import Speaker

        patient_turns = [t.text for t in sample.turns if t.speaker is Speaker.PATIENT]
        lead = patient_turns[: self.k] if patient_turns else [t.text for t in sample.turns[: self.k]]
        return " ".join(lead)

    def close(self) -> None:
        pass


def check_prediction_batch(predictions: Sequence[Prediction], samples: Sequence[Sample]) -> None:
    """Response-completeness guard applied to every adapter's output."""
    expected = [s.id for s in samples]
    got = [p.sample_id for p in predictions]
    if got != expected:
        raise ProtocolError(
            f"prediction batch does not match request: expected {expected[:5]}..., got {got[:5]}..."
        )
    for p in predictions:
        if p.log_likelihood > 0:
            raise ProtocolError(f"positive log-likelihood for {p.sample_id!r}")
        if p.token_count < 1:
            raise ProtocolError(f"token_count < 1 for {p.sample_id!r}")
