import { ApiError } from "./client.js";

// Inline banner for failures that are part of the workflow (out-of-order
// runs, rejected edits). Unexpected errors still land here rather than
// vanishing into the console.
export function renderBanner(container: HTMLElement, error: unknown): void {
  container.textContent = "";
  if (error === null || error === undefined) return;
  const banner = document.createElement("div");
  banner.className = "banner";
  if (error instanceof ApiError) {
    banner.classList.add(error.status === 409 || error.status === 422 ? "banner-warn" : "banner-error");
    banner.dataset.status = String(error.status);
    const label = document.createElement("strong");
    label.textContent = error.errorName;
    banner.append(label, document.createTextNode(` ${error.detail}`));
  } else {
    banner.classList.add("banner-error");
    banner.textContent = error instanceof Error ? error.message : String(error);
  }
  const dismiss = document.createElement("button");
  dismiss.type = "button";
  dismiss.className = "banner-dismiss";
  dismiss.textContent = "×";
  dismiss.addEventListener("click", () => banner.remove());
  banner.append(dismiss);
  container.append(banner);
}

export function clearBanner(container: HTMLElement): void {
  container.textContent = "";
}
