"""Live expert-labeling queue and its HTTP service.

When a run uses ``hl_mode: live_human``, the engine enqueues one
annotation task per selected sample and suspends. This module owns the
persisted queue (stored inside the run's checkpoint directory, so the
service is stateless across restarts) and the local HTTP API the
browser UI drives:

    GET  /api/queue?run_id=...      pending tasks
    GET  /api/task/{task_id}        full conversation for one task
    POST /api/task/{task_id}/submit {"summary": "..."}
    GET  /api/status?run_id=...     {iteration, pending_count, resumable}

Submissions are first-wins: a second submit for the same task returns
409 and leaves the original untouched. When the last pending task of
the iteration is submitted the run's checkpoint is marked resumable.
The service binds a local port and has no authentication; it is a
single-operator tool.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .corpus import Sample, _atomic_write
from .runstate import STATUS_AWAITING, STATUS_RESUMABLE, RunDir


class AnnotationError(ValueError):
    """Queue misuse: unknown task, empty summary, unfulfilled queue."""


class AnnotationConflict(AnnotationError):
    """Task already submitted; the first submission wins."""


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    sample_id: str
    iteration: int
    turns: tuple[tuple[str, str], ...]
    status: str = "pending"
    submitted_summary: str | None = None
    submitted_at: str | None = None

    def __post_init__(self) -> None:
        submitted = self.status == "submitted"
        has_summary = bool(self.submitted_summary and self.submitted_summary.strip())
        if submitted != has_summary:
            raise AnnotationError(
                f"task {self.task_id!r}: submitted status and summary must agree"
            )

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "sample_id": self.sample_id,
            "iteration": self.iteration,
            "turns": [{"speaker": s, "text": t} for s, t in self.turns],
            "status": self.status,
            "submitted_summary": self.submitted_summary,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_record(cls, record: dict) -> "AnnotationTask":
        return cls(
            task_id=record["task_id"],
            sample_id=record["sample_id"],
            iteration=record["iteration"],
            turns=tuple((t["speaker"], t["text"]) for t in record["turns"]),
            status=record["status"],
            submitted_summary=record.get("submitted_summary"),
            submitted_at=record.get("submitted_at"),
        )


def task_id_for(iteration: int, sample_id: str) -> str:
    return f"i{iteration}-{sample_id}"


def _write_queue(path: Path, iteration: int, tasks: list[AnnotationTask]) -> None:
    payload = {"iteration": iteration, "tasks": [t.to_record() for t in tasks]}
    _atomic_write(path, json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1))


def _read_queue(path: Path) -> tuple[int, list[AnnotationTask]]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    return payload["iteration"], [AnnotationTask.from_record(r) for r in payload["tasks"]]


def enqueue(run_dir: RunDir, selected: list[Sample], iteration: int) -> list[AnnotationTask]:
    """Persist pending tasks for the iteration; idempotent on resume."""
    for path in run_dir.annotation_queue_paths():
        other_iteration, tasks = _read_queue(path)
        if other_iteration != iteration and any(t.status == "pending" for t in tasks):
            raise AnnotationError(
                f"iteration {other_iteration} still has pending annotation tasks"
            )
    path = run_dir.annotation_queue_path(iteration)
    if path.exists():
        _, existing = _read_queue(path)
        existing_ids = {t.sample_id for t in existing}
        if existing_ids != {s.id for s in selected}:
            raise AnnotationError(
                f"iteration {iteration} queue exists with different samples"
            )
        return existing
    tasks = [
        AnnotationTask(
            task_id=task_id_for(iteration, sample.id),
            sample_id=sample.id,
            iteration=iteration,
            turns=tuple((t.speaker.value, t.text) for t in sample.turns),
        )
        for sample in selected
    ]
    _write_queue(path, iteration, tasks)
    return tasks


def load_tasks(run_dir: RunDir) -> list[AnnotationTask]:
    tasks: list[AnnotationTask] = []
    for path in run_dir.annotation_queue_paths():
        _, queue = _read_queue(path)
        tasks.extend(queue)
    return tasks


def load_iteration_tasks(run_dir: RunDir, iteration: int) -> list[AnnotationTask]:
    path = run_dir.annotation_queue_path(iteration)
    if not path.exists():
        return []
    _, tasks = _read_queue(path)
    return tasks


_submit_lock = threading.Lock()


def submit(run_dir: RunDir, task_id: str, summary: str) -> AnnotationTask:
    """Record a summary for a pending task (single-writer, first wins)."""
    if not summary or not summary.strip():
        raise AnnotationError("summary must be nonempty")
    with _submit_lock:
        for path in run_dir.annotation_queue_paths():
            iteration, tasks = _read_queue(path)
            for index, task in enumerate(tasks):
                if task.task_id != task_id:
                    continue
                if task.status == "submitted":
                    raise AnnotationConflict(f"task {task_id!r} was already submitted")
                updated = replace(
                    task,
                    status="submitted",
                    submitted_summary=summary,
                    submitted_at=datetime.now(timezone.utc).isoformat(),
                )
                tasks[index] = updated
                _write_queue(path, iteration, tasks)
                if all(t.status == "submitted" for t in tasks):
                    state = run_dir.read_state() or {}
                    if state.get("status") == STATUS_AWAITING:
                        run_dir.set_status(STATUS_RESUMABLE)
                return updated
    raise AnnotationError(f"unknown task id {task_id!r}")


def queue_status(run_dir: RunDir) -> dict:
    state = run_dir.read_state() or {}
    iteration = state.get("awaiting_iteration")
    tasks = [
        t for t in load_tasks(run_dir)
        if iteration is None or t.iteration == iteration
    ]
    pending = [t for t in tasks if t.status == "pending"]
    return {
        "run_id": run_dir.run_id,
        "iteration": iteration,
        "pending_count": len(pending),
        "total_count": len(tasks),
        "resumable": state.get("status") == STATUS_RESUMABLE,
    }


# -- HTTP service (annotation_http owns the FastAPI app) --------------------


def create_app(checkpoint_root: str | Path, run_id: str, ui_dir: str | Path | None = None):
    from .annotation_http import create_app as _create_app

    return _create_app(checkpoint_root, run_id, ui_dir)


def serve(checkpoint_root: str | Path, run_id: str, port: int, ui_dir=None) -> None:
    from .annotation_http import serve as _serve

    _serve(checkpoint_root, run_id, port, ui_dir)
