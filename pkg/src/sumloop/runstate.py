"""On-disk layout of a run's checkpoints.

    <checkpoint_root>/<run_id>/
        state.json              run status + config echo
        iter<i>/pool.state      pool after entry i committed
        iter<i>/metrics         entry i's record (sizes, counts, metrics)
        pending_selection.json  selection awaiting live annotation
        annotation/iter<i>.json annotation task queue for iteration i

All writes are atomic (temp file + rename); states are plain JSON so
the annotation service can share them without importing the engine.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .corpus import PoolState, read_pool, write_pool, _atomic_write

STATUS_RUNNING = "running"
STATUS_AWAITING = "awaiting_annotation"
STATUS_RESUMABLE = "resumable"
STATUS_COMPLETE = "complete"

CHECKPOINT_ROOT_ENV = "SUMLOOP_CHECKPOINT_ROOT"


def default_checkpoint_root() -> Path:
    return Path(os.environ.get(CHECKPOINT_ROOT_ENV, "runs"))


class RunDir:
    def __init__(self, checkpoint_root: str | Path, run_id: str) -> None:
        self.run_id = run_id
        self.path = Path(checkpoint_root) / run_id

    @property
    def state_path(self) -> Path:
        return self.path / "state.json"

    def iter_dir(self, iteration: int) -> Path:
        return self.path / f"iter{iteration}"

    def pool_path(self, iteration: int) -> Path:
        return self.iter_dir(iteration) / "pool.state"

    def metrics_path(self, iteration: int) -> Path:
        return self.iter_dir(iteration) / "metrics"

    @property
    def pending_selection_path(self) -> Path:
        return self.path / "pending_selection.json"

    def annotation_queue_path(self, iteration: int) -> Path:
        return self.path / "annotation" / f"iter{iteration}.json"

    def annotation_queue_paths(self) -> list[Path]:
        base = self.path / "annotation"
        if not base.is_dir():
            return []
        return sorted(base.glob("iter*.json"))

    # -- state.json ------------------------------------------------------

    def read_state(self) -> dict | None:
        if not self.state_path.exists():
            return None
        return json.loads(self.state_path.read_text(encoding="utf-8"))

    def write_state(self, state: dict) -> None:
        _atomic_write(self.state_path, json.dumps(state, ensure_ascii=False, sort_keys=True, indent=1))

    def set_status(self, status: str, **extra) -> None:
        state = self.read_state() or {}
        state["status"] = status
        state.update(extra)
        self.write_state(state)

    # -- per-iteration checkpoints ---------------------------------------

    def write_checkpoint(self, iteration: int, pool: PoolState, record: dict) -> None:
        write_pool(pool, self.pool_path(iteration))
        _atomic_write(
            self.metrics_path(iteration),
            json.dumps(record, ensure_ascii=False, sort_keys=True, indent=1),
        )

    def last_complete_iteration(self) -> int | None:
        last = None
        iteration = 0
        while self.pool_path(iteration).exists() and self.metrics_path(iteration).exists():
            last = iteration
            iteration += 1
        return last

    def read_pool(self, iteration: int) -> PoolState:
        return read_pool(self.pool_path(iteration))

    def read_record(self, iteration: int) -> dict:
        return json.loads(self.metrics_path(iteration).read_text(encoding="utf-8"))

    # -- pending live-annotation selection -------------------------------

    def write_pending_selection(self, payload: dict) -> None:
        _atomic_write(
            self.pending_selection_path,
            json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1),
        )

    def read_pending_selection(self) -> dict | None:
        if not self.pending_selection_path.exists():
            return None
        return json.loads(self.pending_selection_path.read_text(encoding="utf-8"))

    def clear_pending_selection(self) -> None:
        if self.pending_selection_path.exists():
            self.pending_selection_path.unlink()
