/**
 * Typed client for the summarization service HTTP API.
 *
 * Every method maps to one endpoint and returns the service's JSON document
 * unchanged; non-2xx answers become ApiError with the status and the
 * service's `detail` message, so the console can surface them inline.
 */

export type Modality = "storyboard" | "skim" | "text";

export interface StoryboardEntryDoc {
  frame_index: number;
  timestamp_s: number;
  image_locator: string;
}

export interface StoryboardDoc {
  kind: "storyboard";
  entries: StoryboardEntryDoc[];
}

export interface SkimIntervalDoc {
  start_s: number;
  end_s: number;
}

export interface SkimDoc {
  kind: "skim";
  intervals: SkimIntervalDoc[];
  total_s: number;
}

export interface TextDoc {
  kind: "text";
  text: string;
  query: string | null;
  source_skim: SkimDoc;
  provider_meta: Record<string, unknown>;
}

export type ArtifactDoc = StoryboardDoc | SkimDoc | TextDoc;

export interface LatencyBreakdown {
  stages: Record<string, number>;
  total_s: number;
}

export interface QueryResult {
  key: string;
  modality: Modality;
  query: string;
  cached: boolean;
  document: ArtifactDoc;
  latency: LatencyBreakdown;
}

export interface GenericResult {
  keys: Record<string, string>;
  cached: boolean;
  storyboard_entries: number;
  skim_total_s: number;
  text_available: boolean;
  text_error: string;
}

export interface StreamInfo {
  count: number;
  rate: number;
  directory: string | null;
  ext: string;
}

export interface SessionDetail {
  id: string;
  meta: {
    duration_s: number;
    frame_count: number;
    native_fps: number;
    source_uri: string;
  };
  config: Record<string, number | string>;
  streams: Record<string, StreamInfo>;
  archives: Record<string, string>;
  artifacts: string[];
  generic_ready: boolean;
  warnings: string[];
}

export interface ArtifactResponse {
  key: string;
  document: ArtifactDoc;
  meta: Record<string, unknown>;
}

export interface LatencyResponse {
  report: Record<string, unknown>;
  records: number;
}

/** A non-2xx service answer, carrying what the body said about it. */
export class ApiError extends Error {
  readonly status: number;
  readonly role: string | null;
  readonly retryable: boolean;

  constructor(status: number, detail: string, role: string | null = null, retryable = false) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
    this.role = role;
    this.retryable = retryable;
  }
}

const detailText = (body: unknown): string => {
  if (typeof body === "object" && body !== null && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    return JSON.stringify(detail);
  }
  return "the service answered with an error";
};

export class SummaryApi {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(baseUrl = "", fetchFn: typeof fetch = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  /** URL serving one frame image, from a storyboard entry's locator. */
  frameUrl(sessionId: string, imageLocator: string): string {
    return `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/${imageLocator}`;
  }

  async health(): Promise<{ status: string; sessions: string[]; providers: Record<string, string> }> {
    return this.request("GET", "/healthz");
  }

  async listSessions(): Promise<{ sessions: SessionDetail[] }> {
    return this.request("GET", "/sessions");
  }

  async session(sessionId: string): Promise<SessionDetail> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  async runQuery(sessionId: string, text: string, modality: Modality): Promise<QueryResult> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/query`, {
      text,
      modality,
    });
  }

  async runGeneric(sessionId: string, force = false): Promise<GenericResult> {
    const suffix = force ? "?force=true" : "";
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/generic${suffix}`);
  }

  async artifact(sessionId: string, key: string): Promise<ArtifactResponse> {
    return this.request(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/artifacts/${encodeURIComponent(key)}`,
    );
  }

  async latency(sessionId: string): Promise<LatencyResponse> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/latency`);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let parsed: unknown = null;
    try {
      parsed = await response.json();
    } catch {
      parsed = null;
    }
    if (!response.ok) {
      const doc = (parsed ?? {}) as { role?: string; retryable?: boolean };
      throw new ApiError(
        response.status,
        detailText(parsed),
        doc.role ?? null,
        doc.retryable ?? response.status >= 500,
      );
    }
    return parsed as T;
  }
}
