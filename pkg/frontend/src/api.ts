// Thin fetch client for the five service endpoints.

import type {
  CreateSessionOptions,
  FeedbackResponse,
  SessionPayload,
  SessionState,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function parse<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    const detail =
      typeof body === "object" && body !== null && "error" in body
        ? String((body as { error: unknown }).error)
        : resp.statusText;
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  async createSession(opts: CreateSessionOptions): Promise<SessionPayload> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(opts),
    });
    return parse<SessionPayload>(resp);
  }

  async getState(sessionId: string): Promise<SessionState> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}`);
    return parse<SessionState>(resp);
  }

  async rerank(sessionId: string, rank: number): Promise<FeedbackResponse> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/rerank`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rank }),
    });
    return parse<FeedbackResponse>(resp);
  }

  async edit(
    sessionId: string,
    index: number,
    target: number[],
  ): Promise<FeedbackResponse> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/edit`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ index, target }),
    });
    return parse<FeedbackResponse>(resp);
  }

  async events(sessionId: string): Promise<Record<string, unknown>[]> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/events`);
    const body = await parse<{ events: Record<string, unknown>[] }>(resp);
    return body.events;
  }
}
