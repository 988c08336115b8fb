"""Adapter wire protocol: newline-delimited JSON, strict request/response.

One conversation is a sequence of request objects written by the
harness and response objects written by the adapter, one per line,
UTF-8, in lockstep: exactly one response per request, in order. Any
other interleaving (unexpected op, mismatched run id, extra or missing
items) is a protocol error.

Requests:

    {"op": "fit", "run_id": ..., "seed": ..., "hyperparams": {...},
     "samples": [{"id": ..., "turns": [...], "summary": ...}, ...]}
    {"op": "predict", "run_id": ..., "samples": [{"id": ..., "turns": [...]}]}

Responses:

    {"op": "fit_done", "run_id": ...}
    {"op": "predictions", "run_id": ..., "items": [
        {"id": ..., "summary": ..., "log_likelihood": ..., "token_count": ...}]}
    {"op": "error", "message": ...}

``predictions`` items must cover the requested ids exactly and in
request order; log-likelihoods must be finite and <= 0; token counts
must be integers >= 1. Messages are encoded canonically (sorted keys,
no spaces) so recorded conversations are byte-stable.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence


class ProtocolError(RuntimeError):
    """Adapter broke the wire contract; carries captured diagnostics."""

    def __init__(self, message: str, diagnostics: str | None = None) -> None:
        super().__init__(message if not diagnostics else f"{message} | {diagnostics}")
        self.reason = message
        self.diagnostics = diagnostics


def encode_message(obj: dict) -> str:
    """Canonical single-line form (no trailing newline)."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def decode_message(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"response is not valid JSON: {exc.msg}", line.strip()) from exc
    if not isinstance(obj, dict) or "op" not in obj:
        raise ProtocolError("response is not an object with an 'op' field", line.strip())
    return obj


def fit_request(run_id: str, seed: int, hyperparams: dict, samples: Iterable) -> dict:
    return {
        "op": "fit",
        "run_id": run_id,
        "seed": seed,
        "hyperparams": hyperparams,
        "samples": [
            {
                "id": s.id,
                "turns": [{"speaker": t.speaker.value, "text": t.text} for t in s.turns],
                "summary": summary,
            }
            for s, summary in samples
        ],
    }


def predict_request(run_id: str, samples: Iterable) -> dict:
    return {
        "op": "predict",
        "run_id": run_id,
        "samples": [
            {
                "id": s.id,
                "turns": [{"speaker": t.speaker.value, "text": t.text} for t in s.turns],
            }
            for s in samples
        ],
    }


def check_fit_response(response: dict, run_id: str) -> None:
    if response["op"] == "error":
        raise ProtocolError(f"adapter reported fit error: {response.get('message')}")
    if response["op"] != "fit_done":
        raise ProtocolError(
            f"expected fit_done, got op {response['op']!r}", encode_message(response)
        )
    if response.get("run_id") != run_id:
        raise ProtocolError(
            f"fit_done run_id {response.get('run_id')!r} does not match request {run_id!r}"
        )


def check_predictions_response(
    response: dict, run_id: str, requested_ids: Sequence[str]
) -> list[dict]:
    """Validate a predictions response; returns its items in request order."""
    if response["op"] == "error":
        raise ProtocolError(f"adapter reported predict error: {response.get('message')}")
    if response["op"] != "predictions":
        raise ProtocolError(
            f"expected predictions, got op {response['op']!r}", encode_message(response)
        )
    if response.get("run_id") != run_id:
        raise ProtocolError(
            f"predictions run_id {response.get('run_id')!r} does not match request {run_id!r}"
        )
    items = response.get("items")
    if not isinstance(items, list):
        raise ProtocolError("predictions response has no items list")
    got_ids = [item.get("id") for item in items]
    if got_ids != list(requested_ids):
        raise ProtocolError(
            f"prediction ids do not match request order: expected {list(requested_ids)[:5]}..., "
            f"got {got_ids[:5]}..."
        )
    for item in items:
        ll = item.get("log_likelihood")
        if not isinstance(ll, (int, float)) or not math.isfinite(ll) or ll > 0:
            raise ProtocolError(
                f"prediction for {item.get('id')!r} has invalid log_likelihood {ll!r}"
            )
        tc = item.get("token_count")
        if not isinstance(tc, int) or isinstance(tc, bool) or tc < 1:
            raise ProtocolError(f"prediction for {item.get('id')!r} has invalid token_count {tc!r}")
        if not isinstance(item.get("summary"), str):
            raise ProtocolError(f"prediction for {item.get('id')!r} has no summary string")
    return items
