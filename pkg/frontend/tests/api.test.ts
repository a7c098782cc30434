// Concurrency rules of the fetch wrapper: identical in-flight requests
// collapse to one network call, overtaken responses come back marked stale,
// and uploads always hit the network.

import { describe, expect, it } from "vitest";
import { Api, errorMessage } from "../src/api.js";

interface Call {
  input: string;
  init?: RequestInit;
  resolve: (body: unknown, status?: number) => void;
}

function makeFetch() {
  const calls: Call[] = [];
  const fetchFn = (input: string, init?: RequestInit): Promise<Response> =>
    new Promise((resolvePromise) => {
      calls.push({
        input,
        init,
        resolve: (body: unknown, status = 200) => {
          resolvePromise({
            status,
            ok: status >= 200 && status < 300,
            json: async () => body,
          } as unknown as Response);
        },
      });
    });
  return { calls, fetchFn };
}

const FIT_REQUEST = { region: "East", model: "log", options: { forecast: 0 } };

describe("request deduplication", () => {
  it("collapses identical concurrent requests into one fetch", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("", fetchFn);
    const first = api.fit("s1", FIT_REQUEST);
    const second = api.fit("s1", FIT_REQUEST);
    expect(calls.length).toBe(1);
    calls[0].resolve({ schema_version: 1 });
    const [a, b] = await Promise.all([first, second]);
    expect(a).toBe(b);
    expect(a.body).toEqual({ schema_version: 1 });
  });

  it("sends a fresh request once the previous one settled", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("", fetchFn);
    const first = api.fit("s1", FIT_REQUEST);
    calls[0].resolve({});
    await first;
    const second = api.fit("s1", FIT_REQUEST);
    expect(calls.length).toBe(2);
    calls[1].resolve({});
    await second;
  });

  it("distinguishes requests that differ in body", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("", fetchFn);
    const first = api.fit("s1", FIT_REQUEST);
    const second = api.fit("s1", { ...FIT_REQUEST, model: "poly-season" });
    expect(calls.length).toBe(2);
    calls.forEach((c) => c.resolve({}));
    await Promise.all([first, second]);
  });

  it("never deduplicates uploads", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("", fetchFn);
    const blob = new Blob(["Date,A\n2020-01,1\n"], { type: "text/csv" });
    const first = api.uploadDataset(blob, "a.csv");
    const second = api.uploadDataset(blob, "a.csv");
    expect(calls.length).toBe(2);
    calls.forEach((c) => c.resolve({ session_id: "x" }));
    await Promise.all([first, second]);
  });
});

describe("staleness", () => {
  it("marks a response stale when a newer request on the surface was issued", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("", fetchFn);
    const slow = api.fit("s1", FIT_REQUEST);
    const fast = api.fit("s1", { ...FIT_REQUEST, model: "lag-poly" });
    expect(calls.length).toBe(2);
    calls[1].resolve({ which: "fast" });
    const fastResult = await fast;
    expect(fastResult.stale).toBe(false);
    calls[0].resolve({ which: "slow" });
    const slowResult = await slow;
    expect(slowResult.stale).toBe(true);
  });

  it("tracks surfaces independently", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("", fetchFn);
    const fit = api.fit("s1", FIT_REQUEST);
    const rolling = api.rolling("s1", {
      region: "East",
      model: "all",
      min_train: 36,
      horizon: 3,
      mode: "fixed",
      log_offset: 1,
    });
    calls[0].resolve({});
    calls[1].resolve({});
    const [fitResult, rollingResult] = await Promise.all([fit, rolling]);
    expect(fitResult.stale).toBe(false);
    expect(rollingResult.stale).toBe(false);
  });
});

describe("errorMessage", () => {
  it("prefers the service error message", () => {
    expect(
      errorMessage({
        status: 400,
        ok: false,
        stale: false,
        body: { schema_version: 1, error: { code: "data-format", message: "row 3: bad" } },
      }),
    ).toBe("row 3: bad");
  });

  it("falls back to the HTTP status when the body is not an error object", () => {
    expect(errorMessage({ status: 502, ok: false, stale: false, body: null })).toBe(
      "request failed with HTTP 502",
    );
  });
});

describe("paths", () => {
  it("targets the documented endpoints", async () => {
    const { calls, fetchFn } = makeFetch();
    const api = new Api("http://svc", fetchFn);
    const pending = [
      api.regions("s9"),
      api.fit("s9", FIT_REQUEST),
      api.job("j7"),
    ];
    expect(calls.map((c) => c.input)).toEqual([
      "http://svc/api/sessions/s9/regions",
      "http://svc/api/sessions/s9/fit",
      "http://svc/api/jobs/j7",
    ]);
    expect(calls[1].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[1].init?.body))).toEqual(FIT_REQUEST);
    calls.forEach((c) => c.resolve({}));
    await Promise.all(pending);
  });
});
