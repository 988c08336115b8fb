/**
 * Pure view-state computation. Everything the UI shows is derived from
 * the latest queue + status responses plus the locally selected task id,
 * so a hard refresh always reconverges to the same view.
 */

import type { QueueResponse, StatusResponse, TaskRecord } from "./types.js";

export interface ViewState {
  runId: string;
  banner: string;
  resumable: boolean;
  pending: TaskRecord[];
  selectedTaskId: string | null;
}

export function sortTasks(tasks: TaskRecord[]): TaskRecord[] {
  return [...tasks].sort((a, b) =>
    a.iteration !== b.iteration
      ? a.iteration - b.iteration
      : a.task_id.localeCompare(b.task_id),
  );
}

export function bannerText(status: StatusResponse): string {
  if (status.resumable) {
    return "run resumable — all tasks submitted";
  }
  if (status.iteration === null || status.total_count === 0) {
    return "no annotation tasks queued";
  }
  return (
    `iteration ${status.iteration}: ${status.pending_count} of ` +
    `${status.total_count} remaining; run resumes when 0`
  );
}

export function buildViewState(
  queue: QueueResponse,
  status: StatusResponse,
  selectedTaskId: string | null,
): ViewState {
  const pending = sortTasks(queue.tasks.filter((t) => t.status === "pending"));
  const stillPending = pending.some((t) => t.task_id === selectedTaskId);
  return {
    runId: queue.run_id,
    banner: bannerText(status),
    resumable: status.resumable,
    pending,
    selectedTaskId: stillPending ? selectedTaskId : pending[0]?.task_id ?? null,
  };
}

/** Nonempty after trimming; the service enforces the same rule. */
export function validateSummary(text: string): string | null {
  const trimmed = text.trim();
  return trimmed.length > 0 ? trimmed : null;
}

/** Optimistic update: drop the submitted task and advance the selection. */
export function afterSubmission(state: ViewState, submittedTaskId: string): ViewState {
  const index = state.pending.findIndex((t) => t.task_id === submittedTaskId);
  const pending = state.pending.filter((t) => t.task_id !== submittedTaskId);
  const next = pending[index] ?? pending[pending.length - 1] ?? null;
  return { ...state, pending, selectedTaskId: next ? next.task_id : null };
}

export function remainingAfterOptimisticSubmit(status: StatusResponse): StatusResponse {
  const pending = Math.max(0, status.pending_count - 1);
  return { ...status, pending_count: pending, resumable: status.resumable || pending === 0 };
}
