"""Document rendering: shortforms, Alexandrian pattern texts, and exports.

The Alexandrian layout puts the context before the first star separator, the
bold problem statement with its forces and the bold solution after it, and
the grounding material (known uses, then the resulting context) after the
second separator. ``lint_alexandrian`` checks exactly that shape.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from . import errors
from .gateway import Transcript
from .model import (
    Affordance,
    CITATION_RE,
    CrossReferenceMatrix,
    KnownUse,
    PatternDraft,
    PatternStatus,
    PatternStory,
    live_patterns,
)
from .naming import normalize_name, resolve_name
from .parsing import ERROR, WARNING, ParseDiagnostic, SHORTFORM_LABELS, render_known_use_citations

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Session

STAR_SEPARATOR = "✳ ✳ ✳"


class DocumentKind(str, Enum):
    PATTERN = "pattern"
    LANGUAGE = "language"
    MATRIX = "matrix"
    STORY = "story"
    LOG = "log"
    SHORTFORM = "shortform"


@dataclass(frozen=True)
class RenderedDocument:
    kind: DocumentKind
    body: str


def _italicize_citations(text: str) -> str:
    return CITATION_RE.sub(lambda m: f"*{m.group(1)}*", text)


def render_shortform(pattern: PatternDraft) -> RenderedDocument:
    """The five-line working format a pattern is drafted in."""
    values = (
        pattern.context,
        pattern.problem,
        pattern.forces,
        pattern.solution_statement,
        render_known_use_citations(pattern.known_uses),
    )
    lines = [pattern.name]
    lines.extend(f"{label}: {value}" for label, value in zip(SHORTFORM_LABELS, values))
    return RenderedDocument(DocumentKind.SHORTFORM, "\n".join(lines))


def _pattern_block(pattern: PatternDraft) -> str:
    if pattern.status not in (PatternStatus.REFINED, PatternStatus.CONSOLIDATED):
        raise errors.IncompletePattern(
            f"pattern {pattern.name!r} is {pattern.status.value}; refine it before rendering"
        )
    if not pattern.problem.strip() or not pattern.solution_statement.strip():
        raise errors.IncompletePattern(
            f"pattern {pattern.name!r} needs a problem and a solution statement"
        )
    paragraphs: list[str] = [f"## {pattern.name}"]
    if pattern.context.strip():
        paragraphs.append(pattern.context.strip())
    paragraphs.append(STAR_SEPARATOR)
    paragraphs.append(f"**{pattern.problem.strip()}**")
    if pattern.forces.strip():
        paragraphs.append(pattern.forces.strip())
    paragraphs.append("Therefore,")
    paragraphs.append(f"**{pattern.solution_statement.strip()}**")
    if pattern.solution_detail.strip():
        paragraphs.append(_italicize_citations(pattern.solution_detail.strip()))
    paragraphs.append(STAR_SEPARATOR)

    notes: list[str] = []
    for ref in pattern.known_uses:
        if ref.note and (not notes or notes[-1] != ref.note):
            notes.append(ref.note)
    if notes:
        paragraphs.append(" ".join(notes))

    rationales: list[str] = []
    for edge in pattern.resulting_context:
        rationale = _italicize_citations(edge.rationale)
        if rationale not in rationales:
            rationales.append(rationale)
    paragraphs.extend(rationales)
    return "\n\n".join(paragraphs)


def render_pattern_alexandrian(pattern: PatternDraft) -> RenderedDocument:
    """One pattern in Alexandrian form; requires a refined or consolidated draft."""
    return RenderedDocument(DocumentKind.PATTERN, _pattern_block(pattern))


def render_language(session: "Session") -> RenderedDocument:
    """The whole language: intro, summary table, then every pattern in order."""
    patterns = [
        p
        for p in live_patterns(session.patterns)
        if p.status in (PatternStatus.REFINED, PatternStatus.CONSOLIDATED)
    ]
    if not any(p.status == PatternStatus.CONSOLIDATED for p in patterns):
        raise errors.NoConsolidatedPatterns("consolidate the session before rendering the language")
    intro = (
        f"This language collects {len(patterns)} patterns mined from "
        f"{len(session.known_uses)} worked examples. Each pattern is summarized "
        "below and given in full afterwards."
    )
    table = ["| Pattern | Description |", "| --- | --- |"]
    table.extend(f"| {p.name} | {p.solution_statement.strip()} |" for p in patterns)
    parts = ["# Pattern Language", intro, "\n".join(table)]
    parts.extend(_pattern_block(p) for p in patterns)
    return RenderedDocument(DocumentKind.LANGUAGE, "\n\n".join(parts))


def render_matrix(matrix: CrossReferenceMatrix, registry: Sequence[Affordance]) -> RenderedDocument:
    """The affordance × pattern grid as a markdown table grouped by component."""
    by_id = {a.id: a for a in registry}
    header = "| Component | Affordance | " + " | ".join(matrix.cols) + " |"
    divider = "| --- | --- |" + " --- |" * len(matrix.cols)
    rows: list[str] = []
    previous_component: str | None = None
    for r, affordance_id in enumerate(matrix.rows):
        affordance = by_id.get(affordance_id)
        component = affordance.component.value.replace("_", " ") if affordance else ""
        label = component if component != previous_component else ""
        previous_component = component
        name = affordance.name if affordance else affordance_id
        marks = " | ".join("X" if value else "" for value in matrix.cells[r])
        rows.append(f"| {label} | {name} | {marks} |")
    body = "\n".join([header, divider, *rows])
    return RenderedDocument(DocumentKind.MATRIX, body)


def render_story(story: PatternStory, known_uses: Sequence[KnownUse]) -> RenderedDocument:
    """One known use walked through the patterns it applies, in order."""
    name = next((ku.name for ku in known_uses if ku.id == story.known_use_id), story.known_use_id)
    lines = [f"# Pattern Story: {name}", ""]
    lines.extend(
        f"{i}. **{entry.pattern_name}**: {entry.narrative}"
        for i, entry in enumerate(story.entries, start=1)
    )
    return RenderedDocument(DocumentKind.STORY, "\n".join(lines))


_HEADING_RE = re.compile(r"^## (?P<name>.+)$", re.MULTILINE)
_ITALIC_RE = re.compile(r"(?<!\*)\*(?!\*)([^*\n]+)\*(?!\*)")
_BOLD_PARAGRAPH_RE = re.compile(r"^\*\*[^*]+\*\*$", re.DOTALL)


def _is_bold_paragraph(paragraph: str) -> bool:
    return bool(_BOLD_PARAGRAPH_RE.match(paragraph.strip()))


def lint_alexandrian(
    document: RenderedDocument,
    registry: Sequence[Affordance] = (),
    matrix: CrossReferenceMatrix | None = None,
    pattern_names: Sequence[str] = (),
) -> list[ParseDiagnostic]:
    """Check every pattern block in a rendered document for Alexandrian shape.

    Errors: wrong separator count, missing "Therefore,", unbolded problem or
    solution statements, and italicized affordance citations that the
    registry (or the matrix, when given) does not house. Italic pattern
    names in the closing material only warn when they match nothing.
    """
    if document.kind not in (DocumentKind.PATTERN, DocumentKind.LANGUAGE):
        raise errors.InvariantViolation(f"cannot lint a {document.kind.value} document")
    diagnostics: list[ParseDiagnostic] = []
    affordance_names = [a.name for a in registry]
    by_name = {normalize_name(a.name): a for a in registry}

    headings = list(_HEADING_RE.finditer(document.body))
    if not headings:
        diagnostics.append(ParseDiagnostic(ERROR, "document contains no pattern block"))
    for i, heading in enumerate(headings):
        name = heading.group("name").strip()
        end = headings[i + 1].start() if i + 1 < len(headings) else len(document.body)
        block = document.body[heading.start() : end]
        line = document.body.count("\n", 0, heading.start()) + 1

        paragraphs = [p.strip() for p in block.split("\n\n") if p.strip()]
        separators = [j for j, p in enumerate(paragraphs) if p == STAR_SEPARATOR]
        if len(separators) != 2:
            diagnostics.append(
                ParseDiagnostic(
                    ERROR, f"{name}: expected exactly two star separators, found {len(separators)}", line
                )
            )
            continue
        first, second = separators
        middle = paragraphs[first + 1 : second]
        closing = paragraphs[second + 1 :]

        if not middle or not _is_bold_paragraph(middle[0]):
            diagnostics.append(
                ParseDiagnostic(ERROR, f"{name}: problem statement after the first separator is not bold", line)
            )
        if "Therefore," not in middle:
            diagnostics.append(ParseDiagnostic(ERROR, f"{name}: missing \"Therefore,\" paragraph", line))
            continue
        therefore = middle.index("Therefore,")
        after = middle[therefore + 1 :]
        if not after or not _is_bold_paragraph(after[0]):
            diagnostics.append(
                ParseDiagnostic(ERROR, f"{name}: solution statement after \"Therefore,\" is not bold", line)
            )

        for paragraph in after[1:]:  # solution detail: citations must be housed
            for cited in _ITALIC_RE.findall(paragraph):
                match = resolve_name(cited, affordance_names)
                if not match.resolved:
                    diagnostics.append(
                        ParseDiagnostic(
                            ERROR, f"{name}: cited affordance {cited!r} is not in the registry", line
                        )
                    )
                    continue
                affordance = by_name[normalize_name(match.value)]
                if matrix is not None and not matrix.cell(affordance.id, name):
                    diagnostics.append(
                        ParseDiagnostic(
                            ERROR, f"{name}: cited affordance {cited!r} is not marked for this pattern", line
                        )
                    )

        for paragraph in closing:  # resulting context: italic pattern names
            for mentioned in _ITALIC_RE.findall(paragraph):
                if pattern_names and not resolve_name(mentioned, pattern_names).resolved:
                    diagnostics.append(
                        ParseDiagnostic(
                            WARNING, f"{name}: italicized {mentioned!r} matches no pattern", line
                        )
                    )
    return diagnostics


def export_log(transcript: Transcript) -> RenderedDocument:
    """The whole conversation, chronological, with role and step labels."""
    if not transcript.messages:
        raise errors.EmptyTranscript("transcript is empty; nothing to export")
    sections: list[str] = ["# Conversation Log"]
    for message in transcript.messages:
        tag = message.step_tag.value if message.step_tag else "general"
        sections.append(f"## [{tag}] {message.role}\n\n{message.content}")
    return RenderedDocument(DocumentKind.LOG, "\n\n".join(sections))
