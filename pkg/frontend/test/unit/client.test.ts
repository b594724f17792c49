import { describe, expect, it } from "vitest";

import { WorkbenchClient, WorkbenchError } from "../../src/api.js";

interface Recorded {
  url: string;
  method?: string;
  body?: unknown;
}

function mockFetch(status: number, payload: unknown) {
  const calls: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({
      url,
      method: init?.method,
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => payload,
    } as Response;
  };
  return { calls, fetchFn };
}

describe("WorkbenchClient", () => {
  it("commits annotations with the parent revision", async () => {
    const { calls, fetchFn } = mockFetch(200, { revision: 3, parent: 2 });
    const client = new WorkbenchClient("http://x", fetchFn);
    const snapshot = { common_features: [], classes: {} };
    const result = await client.putAnnotations(snapshot, "note", 2);
    expect(result.revision).toBe(3);
    expect(calls[0].url).toBe("http://x/v1/annotations");
    expect(calls[0].method).toBe("PUT");
    expect(calls[0].body).toEqual({ annotations: snapshot, note: "note", parent_revision: 2 });
  });

  it("sends lambda under its wire name", async () => {
    const { calls, fetchFn } = mockFetch(200, {});
    await new WorkbenchClient("", fetchFn).correct(0.5, "base.json", "test");
    expect(calls[0].body).toEqual({ lambda: 0.5, baseline_ref: "base.json", split: "test" });
  });

  it("sends the class filter under its wire name", async () => {
    const { calls, fetchFn } = mockFetch(200, { scores: [] });
    await new WorkbenchClient("", fetchFn).score("v1", "running");
    expect(calls[0].body).toEqual({ video_id: "v1", class: "running" });
  });

  it("maps a 409 to a revision conflict", async () => {
    const { fetchFn } = mockFetch(409, {
      error: { code: "RevisionConflict", message: "stale", revision: 5 },
    });
    const client = new WorkbenchClient("", fetchFn);
    const err = await client
      .putAnnotations({ common_features: [], classes: {} }, "", 1)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(WorkbenchError);
    expect((err as WorkbenchError).isRevisionConflict).toBe(true);
    expect((err as WorkbenchError).revision).toBe(5);
  });

  it("maps validation failures with diagnostics", async () => {
    const { fetchFn } = mockFetch(400, {
      error: { code: "ValidationFailed", message: "bad", diagnostics: ["class x: zero weight"] },
    });
    const err = await new WorkbenchClient("", fetchFn)
      .putAnnotations({ common_features: [], classes: {} }, "", 1)
      .catch((e: unknown) => e);
    expect((err as WorkbenchError).code).toBe("ValidationFailed");
    expect((err as WorkbenchError).diagnostics).toEqual(["class x: zero weight"]);
  });

  it("requests diffs by path", async () => {
    const { calls, fetchFn } = mockFetch(200, { changes: [] });
    await new WorkbenchClient("http://x", fetchFn).diff(1, 4);
    expect(calls[0].url).toBe("http://x/v1/revisions/1/diff/4");
  });
});
