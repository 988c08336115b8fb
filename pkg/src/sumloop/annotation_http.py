"""HTTP service over the annotation queue.

Kept free of ``from __future__ import annotations``: FastAPI resolves
endpoint annotations at runtime, and stringified closure annotations
cannot be resolved back to the imported types.
"""

from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles

from .annotation import AnnotationConflict, AnnotationError, load_tasks, queue_status, submit
from .runstate import RunDir


def create_app(
    checkpoint_root: Union[str, Path],
    run_id: str,
    ui_dir: Union[str, Path, None] = None,
) -> FastAPI:
    """App scoped to one run's checkpoint directory."""
    run_dir = RunDir(checkpoint_root, run_id)
    app = FastAPI(title="sumloop annotation service")

    def _check_run(requested: Optional[str]) -> None:
        if requested is not None and requested != run_id:
            raise HTTPException(status_code=404, detail=f"service is scoped to run {run_id!r}")

    @app.get("/api/queue")
    def get_queue(run_id: Optional[str] = None):
        _check_run(run_id)
        pending = [t.to_record() for t in load_tasks(run_dir) if t.status == "pending"]
        return {"run_id": run_dir.run_id, "tasks": pending}

    @app.get("/api/task/{task_id}")
    def get_task(task_id: str):
        for task in load_tasks(run_dir):
            if task.task_id == task_id:
                return task.to_record()
        raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")

    @app.post("/api/task/{task_id}/submit")
    async def post_submit(task_id: str, request: Request):
        try:
            body = await request.json()
        except ValueError:
            raise HTTPException(status_code=422, detail="body must be JSON")
        summary = body.get("summary") if isinstance(body, dict) else None
        if not isinstance(summary, str):
            raise HTTPException(status_code=422, detail='body must be {"summary": "..."}')
        try:
            task = submit(run_dir, task_id, summary)
        except AnnotationConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return task.to_record()

    @app.get("/api/status")
    def get_status(run_id: Optional[str] = None):
        _check_run(run_id)
        return queue_status(run_dir)

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=Path(ui_dir), html=True), name="ui")

    return app


def serve(
    checkpoint_root: Union[str, Path],
    run_id: str,
    port: int,
    ui_dir: Union[str, Path, None] = None,
) -> None:
    import uvicorn

    app = create_app(checkpoint_root, run_id, ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
