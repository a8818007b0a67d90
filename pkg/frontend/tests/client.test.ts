import { describe, expect, it } from "vitest";

import { ApiError, WorkbenchClient } from "../src/client.js";

interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

function stubFetch(status: number, payload: unknown): { calls: RecordedCall[]; fetchFn: typeof fetch } {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    calls.push({
      url: String(input),
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return { calls, fetchFn };
}

const SESSION = { id: "s1", patterns: [] };

describe("WorkbenchClient", () => {
  it("creates sessions and unwraps the envelope", async () => {
    const { calls, fetchFn } = stubFetch(201, { session: SESSION });
    const client = new WorkbenchClient("http://api", fetchFn);
    const session = await client.createSession("s1", true);
    expect(session.id).toBe("s1");
    expect(calls[0]).toEqual({
      url: "http://api/sessions",
      method: "POST",
      body: { session_id: "s1", demo: true },
    });
  });

  it("sends ingested examples with the append flag", async () => {
    const { calls, fetchFn } = stubFetch(200, { session: SESSION });
    const client = new WorkbenchClient("http://api", fetchFn);
    await client.ingestExamples("s1", [{ text: "doc", name: "Doc" }], true);
    expect(calls[0]?.url).toBe("http://api/sessions/s1/examples");
    expect(calls[0]?.body).toEqual({ examples: [{ text: "doc", name: "Doc" }], append: true });
  });

  it("runs, approves and reruns steps at their own endpoints", async () => {
    const { calls, fetchFn } = stubFetch(200, { session: SESSION, step: {} });
    const client = new WorkbenchClient("http://api", fetchFn);
    await client.runStep("s1", "extract_solutions");
    await client.approveStep("s1", "extract_solutions");
    await client.rerunStep("s1", "define_problems");
    expect(calls.map((c) => c.url)).toEqual([
      "http://api/sessions/s1/steps/extract_solutions/run",
      "http://api/sessions/s1/steps/extract_solutions/approve",
      "http://api/sessions/s1/steps/define_problems/rerun",
    ]);
    expect(calls.every((c) => c.method === "POST")).toBe(true);
  });

  it("patches a single pattern field", async () => {
    const { calls, fetchFn } = stubFetch(200, { session: SESSION });
    const client = new WorkbenchClient("http://api", fetchFn);
    await client.patchPattern("s1", "Tool Integration", "problem", "new text");
    expect(calls[0]?.method).toBe("PATCH");
    expect(calls[0]?.url).toBe("http://api/sessions/s1/patterns/Tool%20Integration");
    expect(calls[0]?.body).toEqual({ field: "problem", text: "new text", actor: "human" });
  });

  it("renames and drops through their endpoints", async () => {
    const { calls, fetchFn } = stubFetch(200, { session: SESSION });
    const client = new WorkbenchClient("http://api", fetchFn);
    await client.renamePattern("s1", "Old Name", "New Name", "clearer");
    await client.dropPattern("s1", "Old Name", "redundant");
    expect(calls[0]?.url).toBe("http://api/sessions/s1/patterns/Old%20Name/rename");
    expect(calls[0]?.body).toEqual({ new_name: "New Name", reason: "clearer" });
    expect(calls[1]?.url).toBe("http://api/sessions/s1/patterns/Old%20Name/drop");
    expect(calls[1]?.body).toEqual({ reason: "redundant" });
  });

  it("builds render query strings only when arguments are given", async () => {
    const { calls, fetchFn } = stubFetch(200, { kind: "language", body: "x" });
    const client = new WorkbenchClient("http://api", fetchFn);
    await client.render("s1", "language");
    await client.render("s1", "pattern", { name: "Tool Integration" });
    expect(calls[0]?.url).toBe("http://api/sessions/s1/render/language");
    expect(calls[1]?.url).toBe("http://api/sessions/s1/render/pattern?name=Tool+Integration");
  });

  it("maps domain error bodies onto ApiError", async () => {
    const { fetchFn } = stubFetch(409, { error: "OutOfOrder", detail: "approve step 1 first" });
    const client = new WorkbenchClient("http://api", fetchFn);
    const failure = await client.runStep("s1", "consolidate").catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    const apiError = failure as ApiError;
    expect(apiError.status).toBe(409);
    expect(apiError.errorName).toBe("OutOfOrder");
    expect(apiError.detail).toBe("approve step 1 first");
  });

  it("keeps validation error payloads readable", async () => {
    const { fetchFn } = stubFetch(422, { detail: [{ loc: ["body", "actor"], msg: "invalid" }] });
    const client = new WorkbenchClient("http://api", fetchFn);
    const failure = await client.patchPattern("s1", "P", "problem", "x").catch((e: unknown) => e);
    const apiError = failure as ApiError;
    expect(apiError.status).toBe(422);
    expect(apiError.errorName).toBe("HTTP 422");
    expect(apiError.detail).toContain("actor");
  });

  it("survives non-JSON error bodies", async () => {
    const fetchFn = (async () => new Response("<html>boom</html>", { status: 500 })) as typeof fetch;
    const client = new WorkbenchClient("http://api", fetchFn);
    const failure = await client.listSessions().catch((e: unknown) => e);
    const apiError = failure as ApiError;
    expect(apiError.status).toBe(500);
    expect(apiError.errorName).toBe("HTTP 500");
  });
});
