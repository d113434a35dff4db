/** Thin fetch wrapper over the collection service HTTP API. */

import type {
  ActionName,
  ActionResult,
  Phase,
  RecordView,
  SessionInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class SessionClient {
  constructor(
    private readonly baseUrl: string,
    private sessionId: string | null = null,
  ) {}

  get id(): string {
    if (this.sessionId === null) throw new Error("no session started");
    return this.sessionId;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? null : JSON.stringify(body),
    });
    return unwrap<T>(response);
  }

  async start(): Promise<SessionInfo> {
    const info = await this.post<SessionInfo>("/sessions");
    this.sessionId = info.id;
    return info;
  }

  async advancePhase(phase: Phase): Promise<{ phase: Phase }> {
    return this.post(`/sessions/${this.id}/phase`, { phase });
  }

  async takeAction(action: ActionName): Promise<ActionResult> {
    return this.post(`/sessions/${this.id}/action`, { action });
  }

  async submitRationale(text: string): Promise<{ record: RecordView }> {
    return this.post(`/sessions/${this.id}/rationale`, { text });
  }

  async redo(): Promise<{ record: RecordView }> {
    return this.post(`/sessions/${this.id}/redo`);
  }

  async records(): Promise<RecordView[]> {
    const response = await fetch(`${this.baseUrl}/sessions/${this.id}/records`);
    const data = await unwrap<{ records: RecordView[] }>(response);
    return data.records;
  }

  async editRecord(recordId: string, text: string): Promise<{ record: RecordView }> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${this.id}/records/${recordId}`,
      {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text }),
      },
    );
    return unwrap(response);
  }

  async exportJsonl(): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${this.id}/export`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }
}
