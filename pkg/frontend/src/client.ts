import type {
  Matrix,
  Affordance,
  RenderedDocument,
  SessionDoc,
  StepIdValue,
  StepView,
  Story,
  Transcript,
  ValidationReport,
} from "./types.js";

// Domain failures arrive as {error, detail} with a mapped status code;
// FastAPI validation errors arrive as {detail: [...]}.
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorName: string,
    public readonly detail: string,
  ) {
    super(`${errorName}: ${detail}`);
    this.name = "ApiError";
  }
}

interface SessionEnvelope {
  session: SessionDoc;
}

async function parseError(response: Response): Promise<never> {
  let errorName = `HTTP ${response.status}`;
  let detail = "";
  try {
    const data: unknown = await response.json();
    if (data && typeof data === "object") {
      const body = data as { error?: string; detail?: unknown };
      if (typeof body.error === "string") errorName = body.error;
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? "");
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, errorName, detail);
}

export class WorkbenchClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  // -------------------------------------------------------------- sessions

  async createSession(sessionId?: string, demo = false): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>("POST", "/sessions", {
      session_id: sessionId ?? null,
      demo,
    });
    return payload.session;
  }

  async listSessions(): Promise<string[]> {
    const payload = await this.call<{ sessions: string[] }>("GET", "/sessions");
    return payload.sessions;
  }

  async getSession(sessionId: string): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>("GET", `/sessions/${encodeURIComponent(sessionId)}`);
    return payload.session;
  }

  async ingestExamples(
    sessionId: string,
    examples: Array<{ text: string; name?: string }>,
    append = false,
  ): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/examples`,
      { examples, append },
    );
    return payload.session;
  }

  // -------------------------------------------------------------- steps

  async stepTimeline(sessionId: string): Promise<StepView[]> {
    const payload = await this.call<{ steps: StepView[] }>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/steps`,
    );
    return payload.steps;
  }

  async runStep(sessionId: string, step: StepIdValue): Promise<{ session: SessionDoc; step: StepView }> {
    return this.call("POST", `/sessions/${encodeURIComponent(sessionId)}/steps/${step}/run`);
  }

  async approveStep(sessionId: string, step: StepIdValue): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/steps/${step}/approve`,
    );
    return payload.session;
  }

  async rerunStep(sessionId: string, step: StepIdValue): Promise<{ session: SessionDoc; step: StepView }> {
    return this.call("POST", `/sessions/${encodeURIComponent(sessionId)}/steps/${step}/rerun`);
  }

  // -------------------------------------------------------------- curation

  async patchPattern(
    sessionId: string,
    name: string,
    field: string,
    text: string,
    actor: "human" | "ai" = "human",
  ): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>(
      "PATCH",
      `/sessions/${encodeURIComponent(sessionId)}/patterns/${encodeURIComponent(name)}`,
      { field, text, actor },
    );
    return payload.session;
  }

  async renamePattern(sessionId: string, name: string, newName: string, reason = ""): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/patterns/${encodeURIComponent(name)}/rename`,
      { new_name: newName, reason },
    );
    return payload.session;
  }

  async dropPattern(sessionId: string, name: string, reason = ""): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/patterns/${encodeURIComponent(name)}/drop`,
      { reason },
    );
    return payload.session;
  }

  // -------------------------------------------------------------- artifacts

  async matrix(sessionId: string): Promise<{ matrix: Matrix; registry: Affordance[] }> {
    return this.call("GET", `/sessions/${encodeURIComponent(sessionId)}/matrix`);
  }

  async stories(sessionId: string): Promise<Story[]> {
    const payload = await this.call<{ stories: Story[] }>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/stories`,
    );
    return payload.stories;
  }

  async generateStory(sessionId: string, knownUseId: string): Promise<SessionDoc> {
    const payload = await this.call<SessionEnvelope>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/stories`,
      { known_use_id: knownUseId },
    );
    return payload.session;
  }

  async transcript(sessionId: string): Promise<Transcript> {
    const payload = await this.call<{ transcript: Transcript }>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/transcript`,
    );
    return payload.transcript;
  }

  async validate(sessionId: string): Promise<ValidationReport> {
    return this.call("GET", `/sessions/${encodeURIComponent(sessionId)}/validate`);
  }

  async render(
    sessionId: string,
    kind: string,
    query: { name?: string; known_use?: string } = {},
  ): Promise<RenderedDocument> {
    const params = new URLSearchParams();
    if (query.name) params.set("name", query.name);
    if (query.known_use) params.set("known_use", query.known_use);
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.call("GET", `/sessions/${encodeURIComponent(sessionId)}/render/${kind}${suffix}`);
  }
}
