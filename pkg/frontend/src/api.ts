/** Thin typed client over the four annotation-service endpoints. */

import type { QueueResponse, StatusResponse, SubmitResult, TaskRecord } from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path);
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  fetchQueue(runId?: string): Promise<QueueResponse> {
    const query = runId ? `?run_id=${encodeURIComponent(runId)}` : "";
    return this.getJson<QueueResponse>(`/api/queue${query}`);
  }

  fetchTask(taskId: string): Promise<TaskRecord> {
    return this.getJson<TaskRecord>(`/api/task/${encodeURIComponent(taskId)}`);
  }

  fetchStatus(runId?: string): Promise<StatusResponse> {
    const query = runId ? `?run_id=${encodeURIComponent(runId)}` : "";
    return this.getJson<StatusResponse>(`/api/status${query}`);
  }

  async submit(taskId: string, summary: string): Promise<SubmitResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/task/${encodeURIComponent(taskId)}/submit`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ summary }),
      },
    );
    if (response.status === 409) {
      const body = await response.json().catch(() => ({ detail: "already labeled" }));
      return { kind: "conflict", detail: String(body.detail ?? "already labeled") };
    }
    if (response.status === 422) {
      const body = await response.json().catch(() => ({ detail: "invalid submission" }));
      return { kind: "invalid", detail: String(body.detail ?? "invalid submission") };
    }
    if (!response.ok) {
      throw new Error(`submit failed: ${response.status}`);
    }
    return { kind: "submitted", task: (await response.json()) as TaskRecord };
  }
}
