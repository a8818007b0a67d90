import type { Affordance, Matrix } from "./types.js";

function noteFor(matrix: Matrix, affordanceId: string, pattern: string): string | null {
  const hit = matrix.notes.find((n) => n.affordance_id === affordanceId && n.pattern === pattern);
  return hit ? hit.note : null;
}

// Affordance × pattern grid, one section of rows per component. Every row the
// service reports is rendered, marked or not.
export function renderMatrixGrid(container: HTMLElement, matrix: Matrix, registry: Affordance[]): void {
  container.textContent = "";
  const table = document.createElement("table");
  table.className = "matrix-grid";

  const head = table.createTHead();
  const headRow = head.insertRow();
  const corner = document.createElement("th");
  corner.textContent = "affordance";
  headRow.append(corner);
  for (const col of matrix.cols) {
    const th = document.createElement("th");
    th.className = "pattern-col";
    th.dataset.pattern = col;
    th.textContent = col;
    headRow.append(th);
  }

  const body = table.createTBody();
  const byId = new Map(registry.map((a) => [a.id, a]));
  let currentComponent: string | null = null;

  matrix.rows.forEach((affordanceId, rowIndex) => {
    const affordance = byId.get(affordanceId);
    const component = affordance ? affordance.component : "other";
    if (component !== currentComponent) {
      currentComponent = component;
      const groupRow = body.insertRow();
      groupRow.className = "component-group";
      groupRow.dataset.component = component;
      const groupCell = document.createElement("th");
      groupCell.colSpan = matrix.cols.length + 1;
      groupCell.textContent = component;
      groupRow.append(groupCell);
    }

    const row = body.insertRow();
    row.className = "affordance-row";
    row.dataset.affordance = affordanceId;
    const label = document.createElement("th");
    label.textContent = affordance ? affordance.name : affordanceId;
    if (affordance?.description) label.title = affordance.description;
    row.append(label);

    matrix.cols.forEach((pattern, colIndex) => {
      const marked = matrix.cells[rowIndex]?.[colIndex] ?? false;
      const cell = row.insertCell();
      cell.className = marked ? "cell marked" : "cell";
      cell.dataset.affordance = affordanceId;
      cell.dataset.pattern = pattern;
      cell.textContent = marked ? "✕" : "";
      const note = noteFor(matrix, affordanceId, pattern);
      if (note) cell.title = note;
    });
  });

  container.append(table);
}
