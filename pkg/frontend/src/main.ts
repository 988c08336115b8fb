/**
 * DOM shell: queue sidebar, conversation panel, summary editor.
 *
 * All state lives server-side; this file only renders the latest
 * responses (via state.ts) and forwards submissions. Ctrl+Enter (or
 * Cmd+Enter) submits and advances to the next pending task.
 */

import { AnnotationApi } from "./api.js";
import {
  ViewState,
  afterSubmission,
  buildViewState,
  validateSummary,
} from "./state.js";
import type { TaskRecord } from "./types.js";

const api = new AnnotationApi("");

let view: ViewState | null = null;
let notice = "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function refresh(keepSelection = true): Promise<void> {
  const selected = keepSelection && view ? view.selectedTaskId : null;
  const [queue, status] = await Promise.all([api.fetchQueue(), api.fetchStatus()]);
  view = buildViewState(queue, status, selected);
  render();
}

function render(): void {
  if (!view) return;
  el("banner").textContent = view.banner;
  el("banner").className = view.resumable ? "banner resumable" : "banner";
  el("notice").textContent = notice;

  const list = el<HTMLUListElement>("queue");
  list.replaceChildren();
  for (const task of view.pending) {
    const item = document.createElement("li");
    item.textContent = `${task.sample_id} (iteration ${task.iteration})`;
    item.className = task.task_id === view.selectedTaskId ? "selected" : "";
    item.onclick = () => {
      if (!view) return;
      view = { ...view, selectedTaskId: task.task_id };
      notice = "";
      render();
    };
    list.appendChild(item);
  }
  el("queue-count").textContent = `${view.pending.length} pending`;

  const task = view.pending.find((t) => t.task_id === view?.selectedTaskId) ?? null;
  renderTask(task);
}

function renderTask(task: TaskRecord | null): void {
  const conversation = el("conversation");
  const editor = el<HTMLTextAreaElement>("summary");
  const button = el<HTMLButtonElement>("submit");
  conversation.replaceChildren();
  if (!task) {
    el("task-title").textContent = "no pending task selected";
    editor.value = "";
    editor.disabled = true;
    button.disabled = true;
    return;
  }
  el("task-title").textContent = `${task.sample_id} — write the summary`;
  editor.disabled = false;
  button.disabled = false;
  for (const turn of task.turns) {
    const row = document.createElement("div");
    row.className = `turn ${turn.speaker}`;
    const speaker = document.createElement("span");
    speaker.className = "speaker";
    speaker.textContent = turn.speaker;
    const text = document.createElement("span");
    text.textContent = turn.text;
    row.append(speaker, text);
    conversation.appendChild(row);
  }
}

async function submitCurrent(): Promise<void> {
  if (!view || !view.selectedTaskId) return;
  const editor = el<HTMLTextAreaElement>("summary");
  const summary = validateSummary(editor.value);
  if (summary === null) {
    notice = "summary must be nonempty";
    el("notice").textContent = notice;
    return;
  }
  const taskId = view.selectedTaskId;
  const result = await api.submit(taskId, summary);
  if (result.kind === "conflict") {
    notice = "already labeled by someone else; refreshing";
    await refresh(false);
    return;
  }
  if (result.kind === "invalid") {
    notice = result.detail;
    el("notice").textContent = notice;
    return;
  }
  notice = "";
  editor.value = "";
  view = afterSubmission(view, taskId);
  render();
  await refresh(); // reconverge with the service (banner, resumable flag)
}

function wireEvents(): void {
  el<HTMLButtonElement>("submit").onclick = () => void submitCurrent();
  el<HTMLButtonElement>("reload").onclick = () => void refresh(false);
  el<HTMLTextAreaElement>("summary").addEventListener("keydown", (event) => {
    if ((event.ctrlKey || event.metaKey) && event.key === "Enter") {
      event.preventDefault();
      void submitCurrent();
    }
  });
}

wireEvents();
void refresh();
setInterval(() => void refresh(), 10_000);
