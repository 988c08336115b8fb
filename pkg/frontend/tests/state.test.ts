import { describe, expect, it } from "vitest";

import {
  afterSubmission,
  bannerText,
  buildViewState,
  remainingAfterOptimisticSubmit,
  sortTasks,
  validateSummary,
} from "../src/state.js";
import type { QueueResponse, StatusResponse, TaskRecord } from "../src/types.js";

function task(id: string, iteration = 1, status: "pending" | "submitted" = "pending"): TaskRecord {
  return {
    task_id: id,
    sample_id: id.replace(/^i\d+-/, ""),
    iteration,
    turns: [
      { speaker: "patient", text: "my head hurts" },
      { speaker: "doctor", text: "how long?" },
    ],
    status,
    submitted_summary: status === "submitted" ? "done" : null,
    submitted_at: null,
  };
}

function status(pending: number, total: number, resumable = false): StatusResponse {
  return {
    run_id: "r",
    iteration: 1,
    pending_count: pending,
    total_count: total,
    resumable,
  };
}

function queue(...tasks: TaskRecord[]): QueueResponse {
  return { run_id: "r", tasks };
}

describe("bannerText", () => {
  it("shows k of total remaining while tasks are pending", () => {
    expect(bannerText(status(9, 9))).toBe(
      "iteration 1: 9 of 9 remaining; run resumes when 0",
    );
  });

  it("decrements after one submission", () => {
    expect(bannerText(status(8, 9))).toBe(
      "iteration 1: 8 of 9 remaining; run resumes when 0",
    );
  });

  it("switches to resumable when the queue drains", () => {
    expect(bannerText(status(0, 9, true))).toBe("run resumable — all tasks submitted");
  });

  it("handles an empty queue", () => {
    expect(bannerText({ ...status(0, 0), iteration: null })).toBe(
      "no annotation tasks queued",
    );
  });
});

describe("buildViewState", () => {
  it("lists only pending tasks, sorted, and selects the first by default", () => {
    const view = buildViewState(
      queue(task("i1-s3"), task("i1-s1"), task("i1-s2", 1, "submitted")),
      status(2, 3),
      null,
    );
    expect(view.pending.map((t) => t.task_id)).toEqual(["i1-s1", "i1-s3"]);
    expect(view.selectedTaskId).toBe("i1-s1");
  });

  it("keeps the user's selection while it is still pending", () => {
    const view = buildViewState(queue(task("i1-a"), task("i1-b")), status(2, 2), "i1-b");
    expect(view.selectedTaskId).toBe("i1-b");
  });

  it("falls back to the first pending task when the selection disappears", () => {
    const view = buildViewState(queue(task("i1-a")), status(1, 2), "i1-gone");
    expect(view.selectedTaskId).toBe("i1-a");
  });

  it("is a pure function of the responses (refresh reconverges)", () => {
    const q = queue(task("i1-b"), task("i1-a"));
    const s = status(2, 2);
    expect(buildViewState(q, s, null)).toEqual(buildViewState(q, s, null));
  });
});

describe("validateSummary", () => {
  it("rejects empty and whitespace-only text so no request is sent", () => {
    expect(validateSummary("")).toBeNull();
    expect(validateSummary("   \n\t ")).toBeNull();
  });

  it("trims and accepts real text", () => {
    expect(validateSummary("  patient reports fever  ")).toBe("patient reports fever");
  });
});

describe("afterSubmission", () => {
  it("removes the task and advances to the next pending one", () => {
    const view = buildViewState(
      queue(task("i1-a"), task("i1-b"), task("i1-c")),
      status(3, 3),
      "i1-b",
    );
    const next = afterSubmission(view, "i1-b");
    expect(next.pending.map((t) => t.task_id)).toEqual(["i1-a", "i1-c"]);
    expect(next.selectedTaskId).toBe("i1-c");
  });

  it("selects the previous task when the last one is submitted", () => {
    const view = buildViewState(queue(task("i1-a"), task("i1-b")), status(2, 2), "i1-b");
    const next = afterSubmission(view, "i1-b");
    expect(next.selectedTaskId).toBe("i1-a");
  });

  it("clears the selection when the queue empties", () => {
    const view = buildViewState(queue(task("i1-a")), status(1, 1), "i1-a");
    const next = afterSubmission(view, "i1-a");
    expect(next.pending).toEqual([]);
    expect(next.selectedTaskId).toBeNull();
  });
});

describe("remainingAfterOptimisticSubmit", () => {
  it("decrements pending and flips resumable at zero", () => {
    expect(remainingAfterOptimisticSubmit(status(1, 9)).resumable).toBe(true);
    expect(remainingAfterOptimisticSubmit(status(2, 9)).resumable).toBe(false);
    expect(remainingAfterOptimisticSubmit(status(2, 9)).pending_count).toBe(1);
  });
});

describe("sortTasks", () => {
  it("orders by iteration then task id", () => {
    const sorted = sortTasks([task("i2-a", 2), task("i1-b", 1), task("i1-a", 1)]);
    expect(sorted.map((t) => t.task_id)).toEqual(["i1-a", "i1-b", "i2-a"]);
  });
});
