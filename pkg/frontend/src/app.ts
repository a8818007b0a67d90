import { WorkbenchClient } from "./client.js";
import { clearBanner, renderBanner } from "./banner.js";
import { renderStepTimeline } from "./timeline.js";
import { renderPatternCards } from "./patternCard.js";
import { renderMatrixGrid } from "./matrixGrid.js";

export interface AppHandle {
  refresh: () => Promise<void>;
  /** Resolves once the most recent control action has round-tripped. */
  idle: () => Promise<void>;
}

function section(className: string, heading: string): HTMLElement {
  const el = document.createElement("section");
  el.className = className;
  const h = document.createElement("h2");
  h.textContent = heading;
  el.append(h);
  const body = document.createElement("div");
  body.className = "section-body";
  el.append(body);
  return el;
}

function bodyOf(sectionEl: HTMLElement): HTMLElement {
  return sectionEl.querySelector(".section-body") as HTMLElement;
}

// Pure view/controller: every control round-trips through the service and the
// whole board re-renders from what the API returns. Nothing is updated
// optimistically, so a hard reload can never disagree with the page.
export async function mountApp(root: HTMLElement, client: WorkbenchClient, sessionId: string): Promise<AppHandle> {
  root.textContent = "";

  const header = document.createElement("header");
  header.className = "app-header";
  const title = document.createElement("h1");
  title.textContent = `Session ${sessionId}`;
  header.append(title);

  const bannerHost = document.createElement("div");
  bannerHost.className = "banner-host";

  const timelineSection = section("timeline-section", "Steps");
  const patternSection = section("pattern-section", "Patterns");
  const matrixSection = section("matrix-section", "Affordance matrix");

  root.append(header, bannerHost, timelineSection, patternSection, matrixSection);

  const refresh = async (): Promise<void> => {
    const [session, steps, matrixPayload] = await Promise.all([
      client.getSession(sessionId),
      client.stepTimeline(sessionId),
      client.matrix(sessionId),
    ]);
    renderStepTimeline(bodyOf(timelineSection), steps, {
      onRun: (step) => act(() => client.runStep(sessionId, step)),
      onApprove: (step) => act(() => client.approveStep(sessionId, step)),
      onRerun: (step) => act(() => client.rerunStep(sessionId, step)),
    });
    renderPatternCards(bodyOf(patternSection), session, {
      onSaveField: (pattern, field, text) => act(() => client.patchPattern(sessionId, pattern, field, text)),
      onRename: (pattern, newName, reason) => act(() => client.renamePattern(sessionId, pattern, newName, reason)),
      onDrop: (pattern, reason) => act(() => client.dropPattern(sessionId, pattern, reason)),
    });
    renderMatrixGrid(bodyOf(matrixSection), matrixPayload.matrix, matrixPayload.registry);
  };

  // Actions report failure inline and always re-read server state afterwards.
  let pending: Promise<void> = Promise.resolve();
  const act = (call: () => Promise<unknown>): void => {
    clearBanner(bannerHost);
    pending = call()
      .then(
        () => undefined,
        (error: unknown) => renderBanner(bannerHost, error),
      )
      .then(() => refresh());
  };

  await refresh();
  return { refresh, idle: () => pending };
}

// Browser entry: ?session= picks the session, ?api= points at the service
// when the page is not served from the same origin.
export async function bootFromLocation(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const client = new WorkbenchClient(params.get("api") ?? "");
  let sessionId = params.get("session");
  if (!sessionId) {
    const known = await client.listSessions();
    if (known.length > 0) {
      sessionId = known[0] ?? null;
    } else {
      const created = await client.createSession(undefined, true);
      sessionId = created.id;
    }
  }
  if (sessionId) await mountApp(root, client, sessionId);
}
