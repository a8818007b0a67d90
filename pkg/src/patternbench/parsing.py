"""Parsers that turn free-form model responses into structured artifacts.

Responses are markdown-ish lists and labeled blocks. Every parser returns a
(value, diagnostics) pair; diagnostics never abort a parse, while a response
with nothing usable raises the matching empty-result error. Name lookups go
through :mod:`patternbench.naming`; on ambiguity a parser warns and leaves
the reference unresolved rather than guessing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from . import errors
from .model import (
    Affordance,
    CandidateSolution,
    Component,
    CrossReferenceMatrix,
    KnownUse,
    KnownUseRef,
    KNOWN_USE_MARKER_RE,
    PatternDraft,
    PatternStory,
    ProblemStatement,
    RenameMap,
    StoryEntry,
    live_names,
)
from .naming import normalize_name, resolve_name, slugify

WARNING = "warning"
ERROR = "error"


@dataclass(frozen=True)
class ParseDiagnostic:
    """A parse note with an optional source line range (end defaults to start)."""

    severity: str
    message: str
    line: int | None = None
    end_line: int | None = None


# ---------------------------------------------------------------- shared lexing

_BULLET_RE = re.compile(r"^\s*(?:[-*•+]|\d+[.)])\s+")
_MAX_HEAD_WORDS = 8
_MAX_HEAD_CHARS = 80


def _strip_markup(text: str) -> str:
    """Remove bold/italic markers and stray numbering from a name head."""
    text = _BULLET_RE.sub("", text.strip())
    text = text.replace("**", "").replace("__", "")
    if text.startswith("*") and text.endswith("*") and len(text) > 2:
        text = text[1:-1]
    return text.strip().rstrip(":").strip()


def _plausible_head(head: str, max_words: int = _MAX_HEAD_WORDS) -> bool:
    if not head or len(head) > _MAX_HEAD_CHARS:
        return False
    return len(head.split()) <= max_words


@dataclass(frozen=True)
class _Item:
    line: int
    head: str
    body: str


def _iter_items(text: str) -> Iterator[_Item]:
    """Yield list items shaped like ``Name: description``.

    Bulleted/numbered lines may omit the colon (name-only items); plain lines
    count only when they carry a non-empty description, so prose such as an
    intro sentence ending in a colon is never mistaken for an item. A blank
    line closes the current item; other lines continue its description.
    """
    current: dict | None = None
    for idx, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            if current is not None:
                yield _Item(current["line"], current["head"], " ".join(current["parts"]).strip())
                current = None
            continue
        bullet = _BULLET_RE.match(line)
        body = line[bullet.end() :] if bullet else line.strip()
        head, sep, tail = body.partition(":")
        head_clean = _strip_markup(head)
        tail = tail.strip()
        starts_item = False
        if bullet:
            if sep:
                starts_item = _plausible_head(head_clean)
            else:
                head_clean, tail = _strip_markup(body), ""
                starts_item = _plausible_head(head_clean)
        elif sep and tail:
            starts_item = _plausible_head(head_clean)
        if starts_item:
            if current is not None:
                yield _Item(current["line"], current["head"], " ".join(current["parts"]).strip())
            current = {"line": idx, "head": head_clean, "parts": [tail] if tail else []}
        elif current is not None:
            current["parts"].append(line.strip())
    if current is not None:
        yield _Item(current["line"], current["head"], " ".join(current["parts"]).strip())


_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    return [part.strip() for part in _SENTENCE_SPLIT_RE.split(text.strip()) if part.strip()]


# ---------------------------------------------------------------- labeled sections

_SECTION_RE = re.compile(
    r"^\s*(?:[-*•+]\s+)?(?:\*\*)?(context|problem|forces|solution|known uses|resulting context)"
    r"(?:\*\*)?\s*:\s*(.*)$",
    re.IGNORECASE,
)
_SECTION_FIELD = {
    "context": "context",
    "problem": "problem",
    "forces": "forces",
    "solution": "solution",
    "known uses": "known_uses",
    "resulting context": "resulting_context",
}
SHORTFORM_LABELS = ("Context", "Problem", "Forces", "Solution", "Known Uses")


@dataclass(frozen=True)
class SectionBlock:
    """One labeled section of a pattern block; label is from the closed set."""

    label: str  # context | problem | forces | solution | known_uses | resulting_context
    body: str


def parse_section_blocks(text: str) -> list[SectionBlock]:
    """Scan labeled sections in order; continuation lines join with a space."""
    blocks: list[SectionBlock] = []
    label: str | None = None
    parts: list[str] = []

    def close() -> None:
        nonlocal label, parts
        if label is not None:
            blocks.append(SectionBlock(label, " ".join(parts).strip()))
        label, parts = None, []

    for line in text.splitlines():
        matched = _SECTION_RE.match(line)
        if matched:
            close()
            label = _SECTION_FIELD[matched.group(1).lower()]
            parts = [matched.group(2).strip()] if matched.group(2).strip() else []
        elif label is not None and line.strip():
            parts.append(line.strip())
    close()
    return blocks


# ---------------------------------------------------------------- solutions / problems


def parse_solutions(text: str) -> tuple[list[CandidateSolution], list[ParseDiagnostic]]:
    """Extract candidate solutions; duplicate normalized names are merged."""
    diagnostics: list[ParseDiagnostic] = []
    solutions: list[CandidateSolution] = []
    seen: dict[str, int] = {}
    for item in _iter_items(text):
        key = normalize_name(item.head)
        if not key:
            continue
        if key in seen:
            diagnostics.append(
                ParseDiagnostic(WARNING, f"duplicate solution name {item.head!r} merged", item.line)
            )
            kept = solutions[seen[key]]
            if item.body and item.body not in kept.description:
                merged = (kept.description + "; " + item.body).strip("; ")
                solutions[seen[key]] = CandidateSolution(kept.name, merged, kept.provenance)
            continue
        seen[key] = len(solutions)
        solutions.append(CandidateSolution(name=item.head, description=item.body))
    if not solutions:
        raise errors.NoSolutionsFound("no candidate solutions found in response")
    return solutions, diagnostics


def parse_problems(
    text: str, solutions: Sequence[CandidateSolution]
) -> tuple[list[ProblemStatement], list[ParseDiagnostic]]:
    """Extract problem statements and attach them to solutions by fuzzy name."""
    diagnostics: list[ParseDiagnostic] = []
    names = [s.name for s in solutions]
    problems: list[ProblemStatement] = []
    for item in _iter_items(text):
        match = resolve_name(item.head, names)
        if match.resolved:
            problems.append(ProblemStatement(solution_name=match.value, text=item.body or item.head))
            if match.kind == "fuzzy":
                diagnostics.append(
                    ParseDiagnostic(
                        WARNING, f"problem head {item.head!r} fuzzy-matched solution {match.value!r}", item.line
                    )
                )
        else:
            reason = "is ambiguous" if match.kind == "ambiguous" else "matches no solution"
            diagnostics.append(
                ParseDiagnostic(WARNING, f"problem head {item.head!r} {reason}; kept unattached", item.line)
            )
            full = f"{item.head}: {item.body}" if item.body else item.head
            problems.append(ProblemStatement(solution_name=None, text=full))
    if not problems:
        raise errors.NoProblemsFound("no problem statements found in response")
    return problems, diagnostics


# ---------------------------------------------------------------- pattern shortforms


def split_known_use_citations(body: str) -> list[KnownUseRef]:
    """Split a Known Uses line into notes.

    With ``[[ku:<id>]]`` markers each marker pins the preceding note to a
    known use (several adjacent markers share one note). Without markers the
    body is split into sentences with unresolved (None) ids for the caller
    to resolve against known-use names.
    """
    if not body.strip():
        return []
    if KNOWN_USE_MARKER_RE.search(body):
        refs: list[KnownUseRef] = []
        note: str | None = None
        for i, token in enumerate(KNOWN_USE_MARKER_RE.split(body)):
            if i % 2 == 1:
                refs.append(KnownUseRef(known_use_id=token.strip(), note=note or ""))
            elif token.strip():
                note = token.strip()
        return refs
    return [KnownUseRef(known_use_id=None, note=sentence) for sentence in split_sentences(body)]


def render_known_use_citations(refs: Sequence[KnownUseRef]) -> str:
    """Inverse of :func:`split_known_use_citations` for resolved refs."""
    parts: list[str] = []
    previous_note: str | None = None
    for ref in refs:
        if ref.note != previous_note:
            parts.append(ref.note)
            previous_note = ref.note
        parts.append(f"[[ku:{ref.known_use_id}]]")
    return " ".join(p for p in parts if p)


def parse_pattern_shortforms(text: str) -> tuple[list[PatternDraft], list[ParseDiagnostic]]:
    """Parse labeled shortform blocks (Context/Problem/Forces/Solution/Known Uses).

    A block is anchored by its Context line; the nearest preceding non-blank,
    non-section line names the pattern. Known-use ids stay None here when the
    response carries prose mentions instead of explicit markers.
    """
    diagnostics: list[ParseDiagnostic] = []
    lines = text.splitlines()
    anchors = [
        i
        for i, line in enumerate(lines)
        if (m := _SECTION_RE.match(line)) and m.group(1).lower() == "context"
    ]
    if not anchors:
        raise errors.NoPatternsFound("no pattern shortform blocks found in response")

    name_lines: list[int] = []
    for anchor in anchors:
        name_line = -1
        for j in range(anchor - 1, -1, -1):
            if not lines[j].strip():
                continue
            if _SECTION_RE.match(lines[j]):
                break
            name_line = j
            break
        if name_line < 0:
            diagnostics.append(ParseDiagnostic(WARNING, "shortform block without a name skipped", anchor + 1))
            continue
        name_lines.append(name_line)

    drafts: list[PatternDraft] = []
    seen: set[str] = set()
    for idx, name_line in enumerate(name_lines):
        end = name_lines[idx + 1] if idx + 1 < len(name_lines) else len(lines)
        name = _strip_markup(lines[name_line])
        if not name:
            diagnostics.append(ParseDiagnostic(WARNING, "empty pattern name skipped", name_line + 1))
            continue
        key = normalize_name(name)
        if key in seen:
            diagnostics.append(
                ParseDiagnostic(WARNING, f"duplicate pattern block {name!r} skipped", name_line + 1)
            )
            continue
        seen.add(key)
        sections = parse_section_blocks("\n".join(lines[name_line + 1 : end]))
        text_of: dict[str, str] = {}
        for section in sections:
            if section.label == "resulting_context":
                diagnostics.append(
                    ParseDiagnostic(
                        WARNING, f"resulting context inside shortform for {name!r} ignored", name_line + 1
                    )
                )
                continue
            if section.label in text_of:
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"repeated section {section.label!r} in {name!r}", name_line + 1)
                )
                continue
            text_of[section.label] = section.body
        missing = [lab for lab in ("context", "problem", "forces", "solution", "known_uses") if lab not in text_of]
        if missing:
            diagnostics.append(
                ParseDiagnostic(
                    WARNING, f"pattern {name!r} missing sections: {', '.join(missing)}", name_line + 1
                )
            )
        drafts.append(
            PatternDraft(
                name=name,
                context=text_of.get("context", ""),
                problem=text_of.get("problem", ""),
                forces=text_of.get("forces", ""),
                solution_statement=text_of.get("solution", ""),
                known_uses=tuple(split_known_use_citations(text_of.get("known_uses", ""))),
            )
        )
    if not drafts:
        raise errors.NoPatternsFound("no pattern shortform blocks found in response")
    return drafts, diagnostics


# ---------------------------------------------------------------- known-use mentions

_ALL_EXAMPLES_PHRASES = (
    "each example",
    "all examples",
    "every example",
    "all the examples",
    "all three examples",
    "each of the examples",
    "in each case",
    "across the examples",
)
_GENERIC_NAME_TOKENS = {
    "scenario",
    "scenarios",
    "example",
    "examples",
    "case",
    "cases",
    "application",
    "applications",
    "the",
    "a",
    "an",
    "of",
}
_WORD_RE = re.compile(r"[a-z0-9']+")


def _token_set(text: str) -> set[str]:
    tokens = set(_WORD_RE.findall(text))
    return tokens | {t.rstrip("s") for t in tokens}


def resolve_known_use_mentions(note: str, known_uses: Sequence[KnownUse]) -> list[KnownUse]:
    """Known uses a prose note refers to, by name-token containment.

    A name matches when all of its distinctive tokens (generic suffixes like
    "scenario"/"example" dropped) occur in the note; "each example"-style
    phrases alias every known use.
    """
    normalized = normalize_name(note)
    if any(phrase in normalized for phrase in _ALL_EXAMPLES_PHRASES):
        return list(known_uses)
    note_tokens = _token_set(normalized)
    matched: list[KnownUse] = []
    for known_use in known_uses:
        stems = [
            t for t in _WORD_RE.findall(normalize_name(known_use.name)) if t not in _GENERIC_NAME_TOKENS
        ]
        if stems and all(t in note_tokens or t.rstrip("s") in note_tokens for t in stems):
            matched.append(known_use)
    return matched


# ---------------------------------------------------------------- affordances

_COMPONENT_PATTERNS: tuple[tuple[re.Pattern, Component], ...] = (
    (re.compile(r"\b(?:llms?|large language models?)\b", re.IGNORECASE), Component.LLM),
    (re.compile(r"\bdatabases?\b", re.IGNORECASE), Component.DATABASE),
    (re.compile(r"\bexternal tools?\b", re.IGNORECASE), Component.EXTERNAL_TOOL),
)


def _component_for_heading(heading: str) -> Component | None:
    for pattern, component in _COMPONENT_PATTERNS:
        if pattern.search(heading):
            return component
    return None


def parse_affordances(text: str) -> tuple[list[Affordance], list[ParseDiagnostic]]:
    """Extract affordances grouped under component headings.

    A heading is a line without a description (bare or ending in a colon)
    naming a component; an item is ``Name: description``. Items that appear
    before any recognizable heading land in component "other" with a warning.
    """
    diagnostics: list[ParseDiagnostic] = []
    affordances: list[Affordance] = []
    used_ids: set[str] = set()
    seen: dict[tuple[Component, str], int] = {}
    component: Component | None = None

    def add(name: str, description: str, comp: Component, line: int) -> None:
        key = (comp, normalize_name(name))
        if key in seen:
            diagnostics.append(ParseDiagnostic(WARNING, f"duplicate affordance {name!r} merged", line))
            return
        seen[key] = len(affordances)
        identifier = slugify(name)
        if identifier in used_ids:
            identifier = f"{identifier}-{comp.value}"
        counter = 2
        base = identifier
        while identifier in used_ids:
            identifier = f"{base}-{counter}"
            counter += 1
        used_ids.add(identifier)
        affordances.append(Affordance(id=identifier, component=comp, name=name, description=description))

    for idx, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            continue
        bullet = _BULLET_RE.match(line)
        body = line[bullet.end() :] if bullet else line.strip()
        head, sep, tail = body.partition(":")
        head_clean = _strip_markup(head)
        tail = tail.strip()
        if sep and tail and _plausible_head(head_clean):
            if component is None:
                diagnostics.append(
                    ParseDiagnostic(
                        WARNING, f"affordance {head_clean!r} appears before any component heading", idx
                    )
                )
                add(head_clean, tail, Component.OTHER, idx)
            else:
                add(head_clean, tail, component, idx)
        elif sep and tail and affordances:
            last = affordances[-1]
            affordances[-1] = Affordance(last.id, last.component, last.name, f"{last.description} {body}".strip())
        else:
            heading = _strip_markup(body)
            matched = _component_for_heading(heading)
            if matched is not None:
                component = matched
            elif heading and _plausible_head(heading):
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"unrecognized component heading {heading!r}; using 'other'", idx)
                )
                component = Component.OTHER
    if not affordances:
        raise errors.NoAffordancesFound("no affordances found in response")
    return affordances, diagnostics


# ---------------------------------------------------------------- cross references


def parse_cross_references(
    text: str, registry: Sequence[Affordance], patterns: Sequence[PatternDraft]
) -> tuple[CrossReferenceMatrix, list[ParseDiagnostic]]:
    """Fill an affordance × pattern matrix from per-pattern blocks.

    Pattern headings resolve fuzzily against live pattern names; affordance
    mentions resolve against the registry. Unresolvable mentions warn and
    leave the cell false; an unresolvable heading skips its whole block.
    """
    diagnostics: list[ParseDiagnostic] = []
    pattern_names = live_names(patterns)
    matrix = CrossReferenceMatrix().conform([a.id for a in registry], list(pattern_names))
    affordance_names = [a.name for a in registry]
    by_name = {normalize_name(a.name): a for a in registry}
    current: str | None = None

    for idx, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            continue
        bullet = _BULLET_RE.match(line)
        body = line[bullet.end() :] if bullet else line.strip()
        head, sep, tail = body.partition(":")
        head_clean = _strip_markup(head)
        tail = tail.strip()
        if not tail:
            heading = _strip_markup(body)
            match = resolve_name(heading, pattern_names)
            if match.resolved:
                current = match.value
                continue
            if _component_for_heading(heading) is not None:
                continue
            aff_match = resolve_name(heading, affordance_names)
            if aff_match.resolved and current is not None:
                matrix = matrix.with_cell(by_name[normalize_name(aff_match.value)].id, current)
                continue
            if heading and _plausible_head(heading):
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"heading {heading!r} matches no live pattern; block skipped", idx)
                )
                current = None
            continue
        if current is None:
            diagnostics.append(
                ParseDiagnostic(WARNING, f"affordance mention {head_clean!r} outside any pattern block", idx)
            )
            continue
        if not _plausible_head(head_clean):
            continue
        aff_match = resolve_name(head_clean, affordance_names)
        if not aff_match.resolved:
            reason = "is ambiguous" if aff_match.kind == "ambiguous" else "matches no affordance"
            diagnostics.append(
                ParseDiagnostic(WARNING, f"mention {head_clean!r} under {current!r} {reason}; cell left unset", idx)
            )
            continue
        if aff_match.kind == "fuzzy":
            diagnostics.append(
                ParseDiagnostic(WARNING, f"mention {head_clean!r} fuzzy-matched affordance {aff_match.value!r}", idx)
            )
        matrix = matrix.with_cell(by_name[normalize_name(aff_match.value)].id, current, note=tail)
    if matrix.true_count() == 0:
        raise errors.EmptyMatrix("no affordance cross-references found in response")
    return matrix, diagnostics


# ---------------------------------------------------------------- resulting contexts

_RC_LABEL_RE = re.compile(
    r"^\s*(?:\*\*)?resulting context(?:\*\*)?(?:\s+for\s+(.+?))?\s*:\s*(.*)$", re.IGNORECASE
)
_NONE_RE = re.compile(r"^\s*(none|n/a|no resulting context)[.!]?\s*$", re.IGNORECASE)

# A run of capitalized words, allowing lowercase connectors inside the run.
_TITLE_RUN_RE = re.compile(
    r"\b[A-Z][A-Za-z]*(?:[ \t](?:(?:and|of|with|for|in|to|the|&)[ \t])*[A-Z][A-Za-z]*)+\b"
)
_LEADING_STOPWORDS = {
    "the", "a", "an", "this", "that", "these", "those", "when", "once", "after",
    "with", "for", "in", "it", "as", "by", "applying", "using", "apply", "use",
    "pattern", "patterns", "resulting", "context", "next", "then", "see", "also",
}


@dataclass(frozen=True)
class ResultingContextBlock:
    """One parsed Resulting Context statement; target None means an explicit none."""

    source: str
    target: str | None
    rationale: str


def _name_mention_re(name: str) -> re.Pattern:
    tokens = [re.escape(t) for t in name.replace("&", " and ").split()]
    return re.compile(r"\b" + r"\s+".join(tokens) + r"\b", re.IGNORECASE)


def extract_pattern_mentions(
    body: str,
    live: Sequence[str],
    dropped: Sequence[str] = (),
    rename_map: RenameMap | None = None,
    exclude: str | None = None,
) -> tuple[list[tuple[str, tuple[int, int]]], list[ParseDiagnostic]]:
    """Find pattern mentions in prose.

    Live names match as whole phrases (any case). Remaining Title Case runs
    are fuzzy-resolved through the rename map; unresolved multi-word runs and
    mentions of dropped patterns are reported as warnings and discarded.
    """
    diagnostics: list[ParseDiagnostic] = []
    taken: list[tuple[int, int]] = []
    found: list[tuple[str, tuple[int, int]]] = []

    def overlaps(span: tuple[int, int]) -> bool:
        return any(not (span[1] <= s or span[0] >= e) for s, e in taken)

    for name in sorted(live, key=len, reverse=True):
        for m in _name_mention_re(name).finditer(body):
            span = m.span()
            if overlaps(span):
                continue
            taken.append(span)
            if exclude is not None and normalize_name(name) == normalize_name(exclude):
                continue
            found.append((name, span))
    for name in dropped:
        for m in _name_mention_re(name).finditer(body):
            if overlaps(m.span()):
                continue
            taken.append(m.span())
            diagnostics.append(ParseDiagnostic(WARNING, f"reference to dropped pattern {name!r} discarded"))
    for m in _TITLE_RUN_RE.finditer(body):
        start, end = m.span()
        candidate = m.group(0)
        while candidate and candidate.split()[0].lower() in _LEADING_STOPWORDS:
            first, _, rest = candidate.partition(" ")
            start += len(first) + 1
            candidate = rest
        if len(candidate.split()) < 2 or overlaps((start, end)):
            continue
        resolved_from = rename_map.current(candidate) if rename_map else candidate
        match = resolve_name(resolved_from, live)
        if match.resolved:
            if exclude is not None and normalize_name(match.value) == normalize_name(exclude):
                taken.append((start, end))
                continue
            found.append((match.value, (start, end)))
            taken.append((start, end))
        else:
            drop_match = resolve_name(resolved_from, dropped)
            if drop_match.resolved:
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"reference to dropped pattern {drop_match.value!r} discarded")
                )
            else:
                reason = "is ambiguous" if match.kind == "ambiguous" else "matches no live pattern"
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"pattern reference {candidate!r} {reason}; discarded")
                )
            taken.append((start, end))
    found.sort(key=lambda item: item[1][0])
    return found, diagnostics


def mark_pattern_mentions(body: str, mentions: Sequence[tuple[str, tuple[int, int]]]) -> str:
    """Wrap each mention span in ``[[...]]`` citation markers."""
    out = body
    for _, (start, end) in sorted(mentions, key=lambda item: item[1][0], reverse=True):
        out = out[:start] + "[[" + out[start:end] + "]]" + out[end:]
    return out


def parse_resulting_contexts(
    text: str, patterns: Sequence[PatternDraft], rename_map: RenameMap | None = None
) -> tuple[list[ResultingContextBlock], list[ParseDiagnostic]]:
    """Parse per-pattern Resulting Context blocks into directed edges.

    Returns one block per (source, target) mention; an explicit "None." body
    yields a single block with target None. Text without any Resulting
    Context block returns an empty list without error.
    """
    diagnostics: list[ParseDiagnostic] = []
    live = live_names(patterns)
    dropped = tuple(p.name for p in patterns if not p.live)
    lines = text.splitlines()
    raw_blocks: list[tuple[str, list[str], int]] = []
    current_source: str | None = None
    collecting: list[str] | None = None

    for idx, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line.strip():
            # Paragraph break ends the open body, never swallow the next block.
            collecting = None
            continue
        label = _RC_LABEL_RE.match(line)
        if label:
            source_text = label.group(1) or current_source
            if source_text is None:
                diagnostics.append(
                    ParseDiagnostic(WARNING, "Resulting Context block without a source pattern", idx)
                )
                collecting = None
                continue
            match = resolve_name(_strip_markup(source_text), live)
            if not match.resolved:
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"source {source_text!r} matches no live pattern; block skipped", idx)
                )
                collecting = None
                continue
            collecting = [label.group(2).strip()] if label.group(2).strip() else []
            raw_blocks.append((match.value, collecting, idx))
            continue
        heading = _strip_markup(line)
        if _plausible_head(heading) and ":" not in heading:
            head_match = resolve_name(heading, live)
            # Inside an open body only an exact name is a heading; a fuzzy hit
            # there is far more likely a continuation line that brushes a name.
            if head_match.resolved and (collecting is None or head_match.kind == "exact"):
                current_source = head_match.value
                collecting = None
                continue
        if collecting is not None:
            collecting.append(line.strip())

    blocks: list[ResultingContextBlock] = []
    for source, body_lines, idx in raw_blocks:
        body = " ".join(part for part in body_lines if part).strip()
        if not body:
            diagnostics.append(ParseDiagnostic(WARNING, f"empty Resulting Context for {source!r}", idx))
            continue
        if _NONE_RE.match(body):
            blocks.append(ResultingContextBlock(source, None, ""))
            continue
        mentions, mention_diags = extract_pattern_mentions(body, live, dropped, rename_map, exclude=source)
        diagnostics.extend(mention_diags)
        if not mentions:
            diagnostics.append(
                ParseDiagnostic(WARNING, f"Resulting Context for {source!r} names no live pattern", idx)
            )
            continue
        rationale = mark_pattern_mentions(body, mentions)
        seen_targets: set[str] = set()
        for target, _ in mentions:
            if target in seen_targets:
                continue
            seen_targets.add(target)
            blocks.append(ResultingContextBlock(source, target, rationale))
    return blocks, diagnostics


# ---------------------------------------------------------------- stories


def parse_pattern_story(
    text: str,
    known_use_id: str,
    patterns: Sequence[PatternDraft],
    rename_map: RenameMap | None = None,
) -> tuple[PatternStory, list[ParseDiagnostic]]:
    """Parse a numbered pattern walk for one known use."""
    diagnostics: list[ParseDiagnostic] = []
    live = live_names(patterns)
    entries: list[StoryEntry] = []
    for item in _iter_items(text):
        head = rename_map.current(item.head) if rename_map else item.head
        match = resolve_name(head, live)
        if not match.resolved:
            reason = "is ambiguous" if match.kind == "ambiguous" else "matches no live pattern"
            diagnostics.append(ParseDiagnostic(WARNING, f"story entry {item.head!r} {reason}; skipped", item.line))
            continue
        if match.kind == "fuzzy":
            diagnostics.append(
                ParseDiagnostic(WARNING, f"story entry {item.head!r} fuzzy-matched {match.value!r}", item.line)
            )
        entries.append(StoryEntry(pattern_name=match.value, narrative=item.body))
    if not entries:
        raise errors.NoStoryEntries("no story entries found in response")
    return PatternStory(known_use_id=known_use_id, entries=tuple(entries)), diagnostics


# ---------------------------------------------------------------- missing-pattern check

_NEGATIVE_RE = re.compile(
    r"\b(no (?:additional|further|missing|new) patterns?|list (?:is|looks|seems) complete|"
    r"nothing (?:is )?missing)\b",
    re.IGNORECASE,
)


def parse_missing_suggestions(
    text: str, patterns: Sequence[PatternDraft], rename_map: RenameMap | None = None
) -> tuple[list[str], list[ParseDiagnostic]]:
    """Extract suggested pattern names, filtering ones that match live patterns."""
    diagnostics: list[ParseDiagnostic] = []
    live = live_names(patterns)
    suggestions: list[str] = []
    seen: set[str] = set()
    if _NEGATIVE_RE.search(text):
        return [], diagnostics
    for item in _iter_items(text):
        name = rename_map.current(item.head) if rename_map else item.head
        key = normalize_name(name)
        if not key or key in seen:
            continue
        match = resolve_name(name, live)
        if match.resolved:
            diagnostics.append(
                ParseDiagnostic(
                    WARNING, f"suggestion {item.head!r} matches existing pattern {match.value!r}; filtered", item.line
                )
            )
            continue
        seen.add(key)
        suggestions.append(item.head)
    return suggestions, diagnostics
