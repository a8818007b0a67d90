import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { mountApp, type AppHandle } from "../src/app.js";
import { WorkbenchClient } from "../src/client.js";
import { STEP_ORDER, type StepIdValue } from "../src/types.js";

// Drives the real HTTP service end to end: boot it, replay the whole
// pipeline by clicking through the board, curate, and check that a fresh
// mount reproduces the exact same page from the API alone.

const PORT = 8700 + Math.floor(Math.random() * 300);
const BASE = `http://127.0.0.1:${PORT}`;
const SESSION_ID = "ui-e2e";

const RENAMES: Array<[string, string]> = [
  ["Data Retrieval and Preprocessing", "Data Preprocessing"],
  ["Integration with External Tools", "Tool Integration"],
  ["Adaptive Response Generation", "Adaptive Response"],
  ["Custom Application Logic", "Custom Logic"],
];
const DROPPED = "Iterative Refinement and Feedback";
const FINAL_NAMES = [
  "Data Preprocessing",
  "Data Structuring and Enhancement",
  "Tool Integration",
  "Semantic Understanding and Synthesis",
  "Adaptive Response",
  "Custom Logic",
];

let server: ChildProcess;
let serverLog = "";
let dataDir: string;
let client: WorkbenchClient;
let root: HTMLElement;
let app: AppHandle;

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 150; attempt++) {
    try {
      const response = await fetch(`${BASE}/sessions`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service never came up on ${BASE}\n${serverLog}`);
}

function card(step: StepIdValue): HTMLElement {
  const el = root.querySelector<HTMLElement>(`.step-card[data-step="${step}"]`);
  if (!el) throw new Error(`no card for step ${step}`);
  return el;
}

async function clickStep(step: StepIdValue, action: "run" | "approve" | "rerun"): Promise<void> {
  card(step).querySelector<HTMLButtonElement>(`button[data-action="${action}"]`)!.click();
  await app.idle();
}

function stepStatuses(): Record<string, string> {
  const out: Record<string, string> = {};
  for (const el of root.querySelectorAll<HTMLElement>(".step-card")) {
    out[el.dataset.step ?? ""] = el.dataset.status ?? "";
  }
  return out;
}

function patternCard(name: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(`.pattern-card[data-pattern="${name}"]`);
  if (!el) throw new Error(`no card for pattern ${name}`);
  return el;
}

function matrixColumns(): string[] {
  return [...root.querySelectorAll<HTMLElement>("th.pattern-col")].map((c) => c.dataset.pattern ?? "");
}

function markedCells(): number {
  return root.querySelectorAll("td.cell.marked").length;
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "review-ui-e2e-"));
  server = spawn("patternbench", ["--data-dir", dataDir, "serve", "--port", String(PORT)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  server.stdout?.on("data", (chunk: Buffer) => (serverLog += chunk.toString()));
  server.stderr?.on("data", (chunk: Buffer) => (serverLog += chunk.toString()));
  await waitForServer();

  client = new WorkbenchClient(BASE);
  await client.createSession(SESSION_ID);
  const examplesDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures", "examples");
  const docs = ["customer-support.md", "research-assistant.md", "startup-failure-analysis.md"].map(
    (file) => ({ text: readFileSync(join(examplesDir, file), "utf8") }),
  );
  await client.ingestExamples(SESSION_ID, docs);

  root = document.createElement("div");
  document.body.append(root);
  app = await mountApp(root, client, SESSION_ID);
});

afterAll(async () => {
  if (server) {
    const gone = new Promise((resolve) => server.once("close", resolve));
    server.kill("SIGTERM");
    await Promise.race([gone, new Promise((resolve) => setTimeout(resolve, 3000))]);
    if (server.exitCode === null) server.kill("SIGKILL");
  }
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("review UI against the live service", () => {
  it("boots with the ingested examples awaiting review", () => {
    expect(root.querySelectorAll(".step-card")).toHaveLength(8);
    const statuses = stepStatuses();
    expect(statuses["identify_examples"]).toBe("awaiting_review");
    for (const step of STEP_ORDER.slice(1)) expect(statuses[step]).toBe("pending");
    expect(card("identify_examples").querySelector(".artifact-json")?.textContent).toContain(
      "Research Assistant",
    );
  });

  it("surfaces an out-of-order run as an inline banner", async () => {
    await clickStep("define_problems", "run");
    const banner = root.querySelector<HTMLElement>(".banner");
    expect(banner).not.toBeNull();
    expect(banner?.dataset.status).toBe("409");
    expect(banner?.textContent).toContain("OutOfOrder");
    expect(stepStatuses()["define_problems"]).toBe("pending");
  });

  it("walks every step to approved", async () => {
    await clickStep("identify_examples", "approve");
    for (const step of STEP_ORDER.slice(1)) {
      await clickStep(step, "run");
      expect(stepStatuses()[step]).toBe("awaiting_review");
      expect(card(step).querySelector(".raw-response")?.textContent?.length).toBeGreaterThan(0);
      await clickStep(step, "approve");
      expect(stepStatuses()[step]).toBe("approved");
    }
    expect(Object.values(stepStatuses())).toEqual(Array(8).fill("approved"));
    expect(matrixColumns()).toHaveLength(7);
    expect(markedCells()).toBe(16);
  });

  it("grays everything after a rerun step as stale", async () => {
    await clickStep("define_problems", "rerun");
    const statuses = stepStatuses();
    expect(statuses["define_problems"]).toBe("awaiting_review");
    for (const step of STEP_ORDER.slice(3)) {
      expect(statuses[step]).toBe("stale");
      expect(card(step).classList.contains("status-stale")).toBe(true);
    }
    await clickStep("define_problems", "approve");
    for (const step of STEP_ORDER.slice(3)) {
      await clickStep(step, "run");
      await clickStep(step, "approve");
    }
    expect(Object.values(stepStatuses())).toEqual(Array(8).fill("approved"));
  });

  it("renames through the card dialog and updates the matrix column", async () => {
    for (const [oldName, newName] of RENAMES) {
      const el = patternCard(oldName);
      el.querySelector<HTMLButtonElement>('button[data-action="rename"]')!.click();
      const form = el.querySelector<HTMLFormElement>(".rename-form")!;
      form.querySelector<HTMLInputElement>("input[data-rename-input]")!.value = newName;
      form.querySelector<HTMLInputElement>("input[data-rename-reason]")!.value = "curated wording";
      form.requestSubmit();
      await app.idle();
      expect(root.querySelector(".banner")).toBeNull();
      expect(matrixColumns()).toContain(newName);
      expect(matrixColumns()).not.toContain(oldName);
      expect(patternCard(newName).querySelector("h3 .provenance-badge")?.textContent).toBe("human");
    }
  });

  it("drops a pattern and the grid loses its column", async () => {
    patternCard(DROPPED).querySelector<HTMLButtonElement>('button[data-action="drop"]')!.click();
    await app.idle();
    expect(root.querySelectorAll(".pattern-card")).toHaveLength(6);
    expect(matrixColumns()).toEqual(FINAL_NAMES);
    expect(markedCells()).toBe(14);
    expect(root.querySelectorAll(".affordance-row")).toHaveLength(12);
  });

  it("saving an edited field flips the provenance badge to mixed", async () => {
    const el = patternCard("Custom Logic");
    const editor = el.querySelector<HTMLTextAreaElement>('.field-editor[data-field="problem"] textarea')!;
    editor.value = `${editor.value}\n\nSharpened during review.`;
    editor.dispatchEvent(new Event("input"));
    el.querySelector<HTMLButtonElement>('button[data-action="save-problem"]')!.click();
    await app.idle();
    expect(
      patternCard("Custom Logic").querySelector('.field-editor[data-field="problem"] .provenance-badge')
        ?.textContent,
    ).toBe("mixed");
  });

  it("reproduces identical state from the API on a fresh mount", async () => {
    const firstRender = root.innerHTML;
    const secondRoot = document.createElement("div");
    document.body.append(secondRoot);
    await mountApp(secondRoot, new WorkbenchClient(BASE), SESSION_ID);
    expect(secondRoot.innerHTML).toBe(firstRender);
  });
});
