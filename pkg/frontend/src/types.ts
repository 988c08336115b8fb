/** Wire shapes of the annotation service (see the four /api endpoints). */

export interface TurnRecord {
  speaker: string;
  text: string;
}

export interface TaskRecord {
  task_id: string;
  sample_id: string;
  iteration: number;
  turns: TurnRecord[];
  status: "pending" | "submitted";
  submitted_summary: string | null;
  submitted_at: string | null;
}

export interface QueueResponse {
  run_id: string;
  tasks: TaskRecord[];
}

export interface StatusResponse {
  run_id: string;
  iteration: number | null;
  pending_count: number;
  total_count: number;
  resumable: boolean;
}

export type SubmitResult =
  | { kind: "submitted"; task: TaskRecord }
  | { kind: "conflict"; detail: string }
  | { kind: "invalid"; detail: string };
