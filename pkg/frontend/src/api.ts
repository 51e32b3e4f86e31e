import type { MetricsResponse, SessionInfo, SessionSettings, Stroke } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface PngPayload {
  bytes: Uint8Array;
  revision: number | null;
}

type FetchLike = typeof fetch;

/** Thin typed client for the labeling service. The UI never computes
 * metrics itself; everything displayed comes through here. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (typeof body?.detail === "string") detail = body.detail;
        else detail = JSON.stringify(body);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp;
  }

  async createSession(image: Blob, settings: SessionSettings = {}): Promise<SessionInfo> {
    const form = new FormData();
    form.append("image", image, "image.png");
    for (const [key, value] of Object.entries(settings)) {
      if (value !== undefined) form.append(key, String(value));
    }
    const resp = await this.request("/sessions", { method: "POST", body: form });
    return (await resp.json()) as SessionInfo;
  }

  async postLabels(sessionId: string, strokes: Stroke[]): Promise<number> {
    const resp = await this.request(`/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ strokes }),
    });
    return ((await resp.json()) as { revision: number }).revision;
  }

  async getMetrics(sessionId: string): Promise<MetricsResponse> {
    const resp = await this.request(`/sessions/${sessionId}/metrics`);
    return (await resp.json()) as MetricsResponse;
  }

  private async png(path: string): Promise<PngPayload> {
    const resp = await this.request(path);
    const header = resp.headers.get("x-revision");
    return {
      bytes: new Uint8Array(await resp.arrayBuffer()),
      revision: header === null ? null : Number(header),
    };
  }

  getSegmentation(sessionId: string, format: "ids" | "color"): Promise<PngPayload> {
    return this.png(`/sessions/${sessionId}/segmentation?format=${format}`);
  }

  getImage(sessionId: string): Promise<PngPayload> {
    return this.png(`/sessions/${sessionId}/image`);
  }

  getMask(sessionId: string): Promise<PngPayload> {
    return this.png(`/sessions/${sessionId}/mask`);
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }
}
