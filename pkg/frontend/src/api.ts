// Thin fetch wrapper for the forecasting service. Two concurrency rules
// from the page contract live here: identical in-flight requests are
// deduplicated by (method, path, body) key, and every response carries a
// staleness flag derived from per-surface sequence numbers so callers can
// drop answers that were overtaken by a newer request.

import type { FitRequest, RollingRequest } from "./types.js";

export interface ApiResult {
  status: number;
  ok: boolean;
  stale: boolean;
  body: any;
}

export interface ApiLike {
  uploadDataset(file: Blob, name?: string): Promise<ApiResult>;
  regions(sessionId: string): Promise<ApiResult>;
  fit(sessionId: string, request: FitRequest): Promise<ApiResult>;
  rolling(sessionId: string, request: RollingRequest): Promise<ApiResult>;
  job(jobId: string): Promise<ApiResult>;
}

export function errorMessage(result: ApiResult): string {
  const message = result.body?.error?.message;
  if (typeof message === "string" && message.length > 0) {
    return message;
  }
  return `request failed with HTTP ${result.status}`;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api implements ApiLike {
  private inflight = new Map<string, Promise<ApiResult>>();
  private issued = new Map<string, number>();
  private fetchFn: FetchLike;

  constructor(private baseUrl = "", fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  uploadDataset(file: Blob, name = "data.csv"): Promise<ApiResult> {
    const form = new FormData();
    form.append("file", file, name);
    // Uploads are never deduplicated: same file twice is a fresh session.
    return this.dispatch("upload", "POST", "/api/datasets", { body: form });
  }

  regions(sessionId: string): Promise<ApiResult> {
    return this.send("regions", "GET", `/api/sessions/${sessionId}/regions`);
  }

  fit(sessionId: string, request: FitRequest): Promise<ApiResult> {
    return this.send("fit", "POST", `/api/sessions/${sessionId}/fit`, request);
  }

  rolling(sessionId: string, request: RollingRequest): Promise<ApiResult> {
    return this.send("rolling", "POST", `/api/sessions/${sessionId}/rolling`, request);
  }

  job(jobId: string): Promise<ApiResult> {
    return this.dispatch("job:" + jobId, "GET", `/api/jobs/${jobId}`, {});
  }

  private send(
    surface: string,
    method: string,
    path: string,
    json?: unknown,
  ): Promise<ApiResult> {
    const key = `${method} ${path} ${json === undefined ? "" : JSON.stringify(json)}`;
    const existing = this.inflight.get(key);
    if (existing) {
      return existing;
    }
    const init: { body?: BodyInit; headers?: Record<string, string> } = {};
    if (json !== undefined) {
      init.body = JSON.stringify(json);
      init.headers = { "content-type": "application/json" };
    }
    const promise = this.dispatch(surface, method, path, init).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, promise);
    return promise;
  }

  private async dispatch(
    surface: string,
    method: string,
    path: string,
    init: { body?: BodyInit; headers?: Record<string, string> },
  ): Promise<ApiResult> {
    const ticket = (this.issued.get(surface) ?? 0) + 1;
    this.issued.set(surface, ticket);
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      body: init.body,
      headers: init.headers,
    });
    let body: any = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    return {
      status: response.status,
      ok: response.ok,
      stale: (this.issued.get(surface) ?? ticket) !== ticket,
      body,
    };
  }
}
