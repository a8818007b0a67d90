import type { StepIdValue, StepView } from "./types.js";

export interface StepActions {
  onRun: (step: StepIdValue) => void;
  onApprove: (step: StepIdValue) => void;
  onRerun: (step: StepIdValue) => void;
}

export function stepLabel(step: StepIdValue): string {
  return step
    .split("_")
    .map((w) => w.charAt(0).toUpperCase() + w.slice(1))
    .join(" ");
}

function artifactSummary(artifacts: Record<string, unknown>): string {
  const parts: string[] = [];
  for (const [key, value] of Object.entries(artifacts)) {
    if (Array.isArray(value)) {
      parts.push(`${key}: ${value.length}`);
    } else if (value && typeof value === "object" && "rows" in value && "cols" in value) {
      const m = value as { rows: unknown[]; cols: unknown[] };
      parts.push(`${key}: ${m.rows.length}×${m.cols.length}`);
    } else if (typeof value === "string") {
      parts.push(`${key}: ${value ? "set" : "empty"}`);
    }
  }
  return parts.join(", ");
}

// The ordered eight-step board. Buttons are always offered; the service is
// the sole judge of what is allowed, and rejections surface as banners.
export function renderStepTimeline(container: HTMLElement, steps: StepView[], actions: StepActions): void {
  container.textContent = "";
  const board = document.createElement("ol");
  board.className = "step-board";

  steps.forEach((view, index) => {
    const card = document.createElement("li");
    card.className = `step-card status-${view.status}`;
    card.dataset.step = view.step;
    card.dataset.status = view.status;

    const header = document.createElement("header");
    const title = document.createElement("h3");
    title.textContent = `${index + 1}. ${stepLabel(view.step)}`;
    const chip = document.createElement("span");
    chip.className = `status-chip status-${view.status}`;
    chip.textContent = view.status;
    header.append(title, chip);

    const controls = document.createElement("div");
    controls.className = "step-controls";
    const buttons: Array<[string, (step: StepIdValue) => void]> = [
      ["run", actions.onRun],
      ["approve", actions.onApprove],
      ["rerun", actions.onRerun],
    ];
    for (const [name, handler] of buttons) {
      const button = document.createElement("button");
      button.type = "button";
      button.textContent = name;
      button.dataset.action = name;
      button.addEventListener("click", () => handler(view.step));
      controls.append(button);
    }

    // Raw model output stays visible beside whatever was parsed out of it.
    const panes = document.createElement("div");
    panes.className = "step-panes";

    const rawPane = document.createElement("div");
    rawPane.className = "raw-pane";
    const rawTitle = document.createElement("h4");
    rawTitle.textContent = "Raw response";
    const rawBody = document.createElement("pre");
    rawBody.className = "raw-response";
    rawBody.textContent = view.raw_response ?? "(not run yet)";
    rawPane.append(rawTitle, rawBody);

    const artifactPane = document.createElement("div");
    artifactPane.className = "artifact-pane";
    const artifactTitle = document.createElement("h4");
    artifactTitle.textContent = "Parsed artifacts";
    const summary = document.createElement("p");
    summary.className = "artifact-summary";
    summary.textContent = artifactSummary(view.artifacts);
    const artifactBody = document.createElement("pre");
    artifactBody.className = "artifact-json";
    artifactBody.textContent = JSON.stringify(view.artifacts, null, 2);
    artifactPane.append(artifactTitle, summary, artifactBody);

    panes.append(rawPane, artifactPane);

    card.append(header, controls, panes);

    if (view.diagnostics.length > 0) {
      const diagnostics = document.createElement("ul");
      diagnostics.className = "diagnostics";
      for (const diag of view.diagnostics) {
        const item = document.createElement("li");
        item.className = `diagnostic-${diag.severity}`;
        item.textContent = diag.line === null ? diag.message : `line ${diag.line}: ${diag.message}`;
        diagnostics.append(item);
      }
      card.append(diagnostics);
    }

    board.append(card);
  });

  container.append(board);
}
