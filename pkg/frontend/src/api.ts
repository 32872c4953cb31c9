import type { LabelState, SessionCreated } from "./types.js";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ServiceError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

/** Thin client for the otseg session service. */
export class ApiClient {
  constructor(private baseUrl: string) {}

  async createSession(
    image: Blob,
    params: { m: number; k?: number; alpha?: number },
  ): Promise<SessionCreated> {
    const form = new FormData();
    form.append("image", image, "upload.png");
    form.append("m", String(params.m));
    if (params.k !== undefined) form.append("k", String(params.k));
    if (params.alpha !== undefined) form.append("alpha", String(params.alpha));
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: form,
    });
    return asJson<SessionCreated>(resp);
  }

  async getLabels(sessionId: string): Promise<LabelState> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/labels`);
    return asJson<LabelState>(resp);
  }

  async addMarker(
    sessionId: string,
    x: number,
    y: number,
    cls: string,
  ): Promise<LabelState> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/markers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ x, y, class: cls }),
    });
    return asJson<LabelState>(resp);
  }

  async undoMarker(sessionId: string): Promise<LabelState> {
    const resp = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/markers/last`,
      { method: "DELETE" },
    );
    return asJson<LabelState>(resp);
  }

  async deleteSession(sessionId: string): Promise<void> {
    await fetch(`${this.baseUrl}/sessions/${sessionId}`, { method: "DELETE" });
  }
}
