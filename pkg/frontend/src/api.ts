// Typed fetch client for the acquisition service.

import type {
  CreateSessionResponse,
  ModelInfo,
  SessionState,
  SubmitResponse,
  TrajectoryRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string, public body: unknown) {
    super(message);
  }
}

async function parse<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const message =
      typeof body === "object" && body !== null && "error" in body
        ? String((body as { error: unknown }).error)
        : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, message, body);
  }
  return body as T;
}

export class AcquisitionClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async listModels(): Promise<ModelInfo[]> {
    const body = await parse<{ models: ModelInfo[] }>(await fetch(this.url("/v1/models")));
    return body.models;
  }

  async createSession(
    modelTag: string,
    policy = "aig",
    budget: number | null = null,
  ): Promise<CreateSessionResponse> {
    const payload: Record<string, unknown> = { model_tag: modelTag, policy };
    if (budget !== null) payload.budget = budget;
    return parse(
      await fetch(this.url("/v1/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      }),
    );
  }

  async getState(sessionId: string): Promise<SessionState> {
    return parse(await fetch(this.url(`/v1/sessions/${sessionId}`)));
  }

  async submitFeature(
    sessionId: string,
    featureIndex: number,
    value: number,
  ): Promise<SubmitResponse> {
    return parse(
      await fetch(this.url(`/v1/sessions/${sessionId}/features`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ feature_index: featureIndex, value }),
      }),
    );
  }

  async exportTrajectory(sessionId: string): Promise<TrajectoryRecord[]> {
    const body = await parse<{ trajectory: TrajectoryRecord[] }>(
      await fetch(this.url(`/v1/sessions/${sessionId}/export`)),
    );
    return body.trajectory;
  }
}
