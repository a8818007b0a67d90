import type { KnownUse, Pattern } from "./types.js";
import { livePatterns } from "./types.js";
import type { SessionDoc } from "./types.js";

export interface CardActions {
  onSaveField: (pattern: string, field: string, text: string) => void;
  onRename: (pattern: string, newName: string, reason: string) => void;
  onDrop: (pattern: string, reason: string) => void;
}

// The prose fields a card edits in place; each save is one field patch.
const PROSE_FIELDS = ["context", "problem", "forces", "solution_statement", "solution_detail"] as const;

function fieldLabel(field: string): string {
  return field.replace(/_/g, " ");
}

function provenanceBadge(pattern: Pattern, field: string): HTMLElement {
  const origin = pattern.provenance[field]?.origin ?? "ai";
  const badge = document.createElement("span");
  badge.className = `provenance-badge provenance-${origin}`;
  badge.dataset.field = field;
  badge.textContent = origin;
  return badge;
}

function knownUseChips(pattern: Pattern, knownUses: KnownUse[]): HTMLElement {
  const block = document.createElement("div");
  block.className = "known-use-chips";
  const excerpt = document.createElement("blockquote");
  excerpt.className = "known-use-excerpt";
  excerpt.hidden = true;
  for (const ref of pattern.known_uses) {
    const chip = document.createElement("button");
    chip.type = "button";
    chip.className = "chip";
    chip.dataset.knownUse = ref.known_use_id;
    const ku = knownUses.find((k) => k.id === ref.known_use_id);
    chip.textContent = ku ? ku.name : ref.known_use_id;
    if (ref.note) chip.title = ref.note;
    // a chip links straight to the example text it cites
    chip.addEventListener("click", () => {
      const showing = excerpt.dataset.knownUse === ref.known_use_id && !excerpt.hidden;
      excerpt.hidden = showing;
      excerpt.dataset.knownUse = ref.known_use_id;
      excerpt.textContent = ku ? ku.narrative : "(example no longer in the session)";
    });
    block.append(chip);
  }
  block.append(excerpt);
  return block;
}

function fieldEditor(pattern: Pattern, field: string, actions: CardActions): HTMLElement {
  const block = document.createElement("div");
  block.className = "field-editor";
  block.dataset.field = field;

  const label = document.createElement("label");
  label.textContent = fieldLabel(field);
  label.append(provenanceBadge(pattern, field));

  const editor = document.createElement("textarea");
  editor.textContent = (pattern as unknown as Record<string, string>)[field] ?? "";
  editor.dataset.field = field;

  const save = document.createElement("button");
  save.type = "button";
  save.textContent = "save";
  save.dataset.action = `save-${field}`;

  // A pattern without a problem is not a pattern; refuse to send the patch.
  const refresh = () => {
    save.disabled = field === "problem" && editor.value.trim() === "";
  };
  refresh();
  editor.addEventListener("input", refresh);
  save.addEventListener("click", () => {
    if (save.disabled) return;
    actions.onSaveField(pattern.name, field, editor.value);
  });

  block.append(label, editor, save);
  return block;
}

function renameForm(pattern: Pattern, actions: CardActions): HTMLElement {
  const form = document.createElement("form");
  form.className = "rename-form";
  form.hidden = true;

  const nameInput = document.createElement("input");
  nameInput.type = "text";
  nameInput.placeholder = "new name";
  nameInput.dataset.renameInput = "";
  const reasonInput = document.createElement("input");
  reasonInput.type = "text";
  reasonInput.placeholder = "reason";
  reasonInput.dataset.renameReason = "";
  const confirm = document.createElement("button");
  confirm.type = "submit";
  confirm.textContent = "confirm rename";
  confirm.dataset.action = "confirm-rename";

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (nameInput.value.trim() === "") return;
    actions.onRename(pattern.name, nameInput.value, reasonInput.value);
  });

  form.append(nameInput, reasonInput, confirm);
  return form;
}

function patternCard(pattern: Pattern, knownUses: KnownUse[], actions: CardActions): HTMLElement {
  const card = document.createElement("article");
  card.className = "pattern-card";
  card.dataset.pattern = pattern.name;

  const header = document.createElement("header");
  const title = document.createElement("h3");
  title.textContent = pattern.name;
  title.append(provenanceBadge(pattern, "name"));
  const status = document.createElement("span");
  status.className = `pattern-status status-${pattern.status}`;
  status.textContent = pattern.status;

  const renameButton = document.createElement("button");
  renameButton.type = "button";
  renameButton.textContent = "rename";
  renameButton.dataset.action = "rename";
  const dropButton = document.createElement("button");
  dropButton.type = "button";
  dropButton.textContent = "drop";
  dropButton.dataset.action = "drop";
  dropButton.addEventListener("click", () => actions.onDrop(pattern.name, ""));

  header.append(title, status, renameButton, dropButton);

  const dialog = renameForm(pattern, actions);
  renameButton.addEventListener("click", () => {
    dialog.hidden = !dialog.hidden;
  });

  card.append(header, dialog, knownUseChips(pattern, knownUses));

  for (const field of PROSE_FIELDS) {
    card.append(fieldEditor(pattern, field, actions));
  }

  if (pattern.resulting_context.length > 0) {
    const edges = document.createElement("ul");
    edges.className = "resulting-context";
    for (const edge of pattern.resulting_context) {
      const item = document.createElement("li");
      item.textContent = edge.rationale ? `→ ${edge.target} (${edge.rationale})` : `→ ${edge.target}`;
      edges.append(item);
    }
    card.append(edges);
  } else if (pattern.resulting_context_none) {
    const none = document.createElement("p");
    none.className = "resulting-context-none";
    none.textContent = "resulting context: none (explicit)";
    card.append(none);
  }

  return card;
}

// One editable card per live pattern; dropped patterns disappear from the deck.
export function renderPatternCards(container: HTMLElement, session: SessionDoc, actions: CardActions): void {
  container.textContent = "";
  const deck = document.createElement("div");
  deck.className = "pattern-deck";
  for (const pattern of livePatterns(session)) {
    deck.append(patternCard(pattern, session.known_uses, actions));
  }
  container.append(deck);
}
