import type {
  CreateSessionRequest,
  CreateSessionResponse,
  ErrorBody,
  LabelEntry,
  PostLabelsResponse,
  RankingResponse,
  SessionMeta,
} from "./types.js";

export class ServiceError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, detail?: unknown) {
    super(`service error ${status} (${code})${detail ? `: ${JSON.stringify(detail)}` : ""}`);
    this.code = code;
    this.status = status;
  }
}

async function parseError(response: Response): Promise<never> {
  let body: ErrorBody = { code: "unknown_error" };
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    // non-JSON error body; keep the fallback code
  }
  throw new ServiceError(response.status, body.code ?? "unknown_error", body.detail);
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.requestJson("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionMeta> {
    return this.requestJson(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  postLabels(sessionId: string, labels: LabelEntry[]): Promise<PostLabelsResponse> {
    return this.requestJson(`/sessions/${encodeURIComponent(sessionId)}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ labels }),
    });
  }

  getRanking(sessionId: string, limit?: number): Promise<RankingResponse> {
    const query = limit ? `?limit=${limit}` : "";
    return this.requestJson(`/sessions/${encodeURIComponent(sessionId)}/ranking${query}`);
  }

  /** Raw run-file bytes, returned exactly as served. */
  async exportRun(sessionId: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/export`);
    if (!response.ok) {
      await parseError(response);
    }
    return await response.text();
  }

  keyframeUrl(shotId: string): string {
    return `${this.baseUrl}/assets/keyframes/${encodeURIComponent(shotId)}`;
  }
}
