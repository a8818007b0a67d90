"""Prompt templates for the eight mining steps, loaded from data files.

Templates live in ``data/templates/`` as plain text: a short ``key: value``
header (step, placeholders, requires), a blank line, then the body. A body
may be split into named sub-prompts by ``=== name ===`` marker lines. The
static text is treated as fixed; only declared ``{slot}`` tokens are filled
at render time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import TYPE_CHECKING, Mapping, Sequence

from . import errors
from .model import KnownUse, PatternDraft, StepId, StepStatus, live_patterns

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Session

_PART_RE = re.compile(r"^=== (?P<name>[a-z_]+) ===$")

# requirement token -> (session artifact accessor, producing step)
_REQUIREMENT_SOURCES = {
    "examples": (lambda s: s.known_uses, StepId.IDENTIFY_EXAMPLES),
    "solutions": (lambda s: s.solutions, StepId.EXTRACT_SOLUTIONS),
    "problems": (lambda s: s.problems, StepId.DEFINE_PROBLEMS),
    "patterns": (lambda s: live_patterns(s.patterns), StepId.DISTILL_PATTERNS),
    "affordances": (lambda s: s.registry, StepId.IDENTIFY_AFFORDANCES),
}


@dataclass(frozen=True)
class PromptTemplate:
    """One step's prompt text plus its slot and input declarations."""

    step: StepId | None
    placeholders: tuple[str, ...]
    requires: tuple[str, ...]
    parts: tuple[tuple[str, str], ...]  # (part name, text), in file order

    @property
    def part_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.parts)

    def part(self, name: str | None = None) -> str:
        if name is None:
            if len(self.parts) != 1:
                raise ValueError(f"template has parts {self.part_names}; pick one")
            return self.parts[0][1]
        for part_name, text in self.parts:
            if part_name == name:
                return text
        raise ValueError(f"template has no part {name!r}")

    @property
    def body(self) -> str:
        return "\n\n".join(text for _, text in self.parts)


def _parse_template(raw: str) -> PromptTemplate:
    header, _, body = raw.partition("\n\n")
    meta: dict[str, str] = {}
    for line in header.splitlines():
        key, _, value = line.partition(":")
        meta[key.strip()] = value.strip()

    def listed(key: str) -> tuple[str, ...]:
        value = meta.get(key, "")
        return tuple(item.strip() for item in value.split(",") if item.strip())

    lines = body.rstrip("\n").split("\n")
    parts: list[tuple[str, list[str]]] = []
    for line in lines:
        marker = _PART_RE.match(line)
        if marker:
            parts.append((marker.group("name"), []))
        elif parts:
            parts[-1][1].append(line)
        elif line.strip():
            parts.append(("body", [line]))
        # leading blank lines before any marker are dropped
    if not parts:
        raise errors.IoError("template has an empty body")
    if parts[0][0] == "body":  # single-part template: keep internal blanks
        parts = [("body", lines)]
    return PromptTemplate(
        step=StepId(meta["step"]) if meta.get("step") else None,
        placeholders=listed("placeholders"),
        requires=listed("requires"),
        parts=tuple((name, "\n".join(text).strip("\n")) for name, text in parts),
    )


def _load_file(name: str) -> PromptTemplate:
    try:
        raw = resources.files("patternbench").joinpath(f"data/templates/{name}.txt").read_text("utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise errors.IoError(f"cannot load template {name!r}: {exc}") from exc
    return _parse_template(raw)


def load_template(step: StepId) -> PromptTemplate:
    return _load_file(step.value)


def list_templates() -> tuple[PromptTemplate, ...]:
    """All eight step templates, in pipeline order."""
    return tuple(load_template(step) for step in StepId)


def format_examples(known_uses: Sequence[KnownUse]) -> str:
    """Join example narratives under numbered headers for the {examples} slot."""
    return "\n\n".join(
        f"Example {i} — {ku.name}:\n{ku.narrative}" for i, ku in enumerate(known_uses, start=1)
    )


def _slot_values(
    session: "Session",
    known_use: KnownUse | None,
    pattern: PatternDraft | None,
) -> Mapping[str, str | None]:
    live = live_patterns(session.patterns)
    return {
        "examples": format_examples(session.known_uses) if session.known_uses else None,
        "solutions": "\n".join(f"{s.name}: {s.description}" for s in session.solutions) or None,
        "problems": "\n".join(p.text for p in session.problems) or None,
        "patterns": "\n".join(p.name for p in live) or None,
        "affordances": "\n".join(a.name for a in session.registry) or None,
        "example_recap": known_use.name if known_use else None,
        "pattern_name": pattern.name if pattern else None,
    }


def _check_requirements(template: PromptTemplate, session: "Session", step_name: str) -> None:
    for token in template.requires:
        accessor, producer = _REQUIREMENT_SOURCES[token]
        if not accessor(session):
            raise errors.MissingInput(step_name, token)
        if session.step_status.get(producer) == StepStatus.STALE:
            raise errors.MissingInput(step_name, token)


def render_prompt(
    step: StepId,
    session: "Session",
    part: str | None = None,
    *,
    known_use: KnownUse | None = None,
    pattern: PatternDraft | None = None,
) -> str:
    """Render one step's prompt (or one named sub-prompt) against a session.

    Raises MissingInput when a declared input is empty or its producing step
    has gone stale, or when a slot in the chosen text has no value.
    """
    template = load_template(step)
    _check_requirements(template, session, step.value)
    text = template.part(part)
    values = _slot_values(session, known_use, pattern)
    for name in template.placeholders:
        token = "{" + name + "}"
        if token not in text:
            continue
        value = values.get(name)
        if value is None:
            raise errors.MissingInput(step.value, name)
        text = text.replace(token, value)
    return text


def render_reflection_prompt() -> str:
    """The closing prompt asking the assistant to recount the process."""
    return _load_file("reflection").part()
