/**
 * Thin typed client for the session service.
 *
 * Snapshot fetches keep the raw response text alongside the parsed document:
 * candidate tables must reflect the service byte-for-byte, so the raw text is
 * the source of truth and tests compare against it directly.
 */

import type {
  CreateSessionRequest,
  CreateSessionResponse,
  FeedbackRequest,
  FeedbackResponse,
  ResultResponse,
  SnapshotDto,
  StatusResponse,
  ThresholdsDto,
  TimelineResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ServiceError";
  }

  /** Violation list from a rejected feedback batch, if that is what this is. */
  get violations(): string[] {
    const d = this.detail;
    if (d && typeof d === "object" && Array.isArray((d as { violations?: unknown }).violations)) {
      return (d as { violations: string[] }).violations;
    }
    return [];
  }
}

export interface SnapshotFetch {
  snapshot: SnapshotDto;
  raw: string;
}

async function parseError(response: Response): Promise<never> {
  let detail: unknown = response.statusText;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (body && body.detail !== undefined) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ServiceError(response.status, detail);
}

export class EvoflowClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) await parseError(response);
    return response;
  }

  async createSession(body: CreateSessionRequest): Promise<CreateSessionResponse> {
    const response = await this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()) as CreateSessionResponse;
  }

  async status(sessionId: string): Promise<StatusResponse> {
    const response = await this.request(`/sessions/${sessionId}/status`);
    return (await response.json()) as StatusResponse;
  }

  /**
   * Pause snapshot. With thresholds the service also returns the partition
   * and the removal candidates for exactly those values.
   */
  async snapshot(sessionId: string, thresholds?: ThresholdsDto): Promise<SnapshotFetch> {
    const params = new URLSearchParams();
    if (thresholds?.t_acc != null) params.set("t_acc", String(thresholds.t_acc));
    if (thresholds?.t_time != null) params.set("t_time", String(thresholds.t_time));
    const query = params.size > 0 ? `?${params.toString()}` : "";
    const response = await this.request(`/sessions/${sessionId}/snapshot${query}`);
    const raw = await response.text();
    return { snapshot: JSON.parse(raw) as SnapshotDto, raw };
  }

  async submitFeedback(sessionId: string, body: FeedbackRequest): Promise<FeedbackResponse> {
    const response = await this.request(`/sessions/${sessionId}/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()) as FeedbackResponse;
  }

  async result(sessionId: string): Promise<ResultResponse> {
    const response = await this.request(`/sessions/${sessionId}/result`);
    return (await response.json()) as ResultResponse;
  }

  async timeline(sessionId: string): Promise<TimelineResponse> {
    const response = await this.request(`/sessions/${sessionId}/timeline`);
    return (await response.json()) as TimelineResponse;
  }
}
