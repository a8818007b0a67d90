"""Domain types for the pattern mining workbench.

Everything here is an immutable value: operations elsewhere in the package
take a value and return a new one, never mutating in place. Collections are
tuples; per-field provenance is a plain dict that is copied on update.

The ``[[...]]`` citation markup is shared across fields and interpreted per
field: in ``solution_detail`` a citation names an affordance, in a
resulting-context rationale it names a pattern, and in a Known Uses line the
``[[ku:<id>]]`` form pins a note to a known use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .naming import normalize_name

# Generic citation: [[Affordance or Pattern Name]]
CITATION_RE = re.compile(r"\[\[(?!ku:)([^\[\]]+?)\]\]")
# Known-use marker: [[ku:<known-use-id>]]
KNOWN_USE_MARKER_RE = re.compile(r"\[\[ku:([^\[\]]+?)\]\]")

Clock = Callable[[], str]


def utc_now() -> str:
    """Default clock: UTC timestamp with second precision."""
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class StepId(str, Enum):
    """The eight pipeline steps, in canonical order."""

    IDENTIFY_EXAMPLES = "identify_examples"
    EXTRACT_SOLUTIONS = "extract_solutions"
    DEFINE_PROBLEMS = "define_problems"
    DISTILL_PATTERNS = "distill_patterns"
    IDENTIFY_AFFORDANCES = "identify_affordances"
    RELATE_AFFORDANCES = "relate_affordances"
    REFINE = "refine"
    CONSOLIDATE = "consolidate"


STEP_ORDER: tuple[StepId, ...] = tuple(StepId)


def step_index(step: StepId) -> int:
    return STEP_ORDER.index(step)


class StepStatus(str, Enum):
    """Lifecycle of a step within a session."""

    PENDING = "pending"
    AWAITING_REVIEW = "awaiting_review"
    APPROVED = "approved"
    STALE = "stale"


class Component(str, Enum):
    """Architectural component an affordance belongs to."""

    LLM = "llm"
    DATABASE = "database"
    EXTERNAL_TOOL = "external_tool"
    OTHER = "other"


class Origin(str, Enum):
    AI = "ai"
    HUMAN = "human"
    MIXED = "mixed"


class PatternStatus(str, Enum):
    DRAFT = "draft"
    REFINED = "refined"
    CONSOLIDATED = "consolidated"
    DROPPED = "dropped"


@dataclass(frozen=True)
class Provenance:
    """Who last shaped a value and when."""

    origin: Origin
    model_id: str | None = None
    edited_at: str = ""

    def merged(self, actor: Origin, model_id: str | None, edited_at: str) -> "Provenance":
        # ai->mixed on human edit, human->mixed on ai edit; never back to ai.
        origin = self.origin if self.origin == actor else Origin.MIXED
        return Provenance(origin=origin, model_id=model_id or self.model_id, edited_at=edited_at)


def ai_provenance(model_id: str | None, edited_at: str) -> Provenance:
    return Provenance(Origin.AI, model_id, edited_at)


def human_provenance(edited_at: str) -> Provenance:
    return Provenance(Origin.HUMAN, None, edited_at)


@dataclass(frozen=True)
class KnownUse:
    """One worked example narrative the mining run starts from."""

    id: str
    name: str
    narrative: str


@dataclass(frozen=True)
class Affordance:
    """A capability offered by a component, housed in the session registry."""

    id: str
    component: Component
    name: str
    description: str = ""


@dataclass(frozen=True)
class CandidateSolution:
    name: str
    description: str = ""
    provenance: Provenance = field(default_factory=lambda: Provenance(Origin.AI))


@dataclass(frozen=True)
class ProblemStatement:
    """A problem statement, attached to a candidate solution when resolvable."""

    solution_name: str | None
    text: str
    provenance: Provenance = field(default_factory=lambda: Provenance(Origin.AI))


@dataclass(frozen=True)
class KnownUseRef:
    """A known-use note on a pattern; id is None only transiently during parsing."""

    known_use_id: str | None
    note: str


@dataclass(frozen=True)
class ResultingContextEdge:
    """Directed pointer from a pattern to the pattern its application sets up."""

    target: str
    rationale: str


PROSE_FIELDS = ("context", "problem", "forces", "solution_statement", "solution_detail")
STRUCTURED_FIELDS = ("known_uses", "resulting_context")
EDITABLE_FIELDS = PROSE_FIELDS + STRUCTURED_FIELDS
PROVENANCE_FIELDS = ("name",) + EDITABLE_FIELDS


@dataclass(frozen=True)
class PatternDraft:
    """A pattern under construction, from shortform draft to consolidated text."""

    name: str
    context: str = ""
    problem: str = ""
    forces: str = ""
    solution_statement: str = ""
    solution_detail: str = ""
    known_uses: tuple[KnownUseRef, ...] = ()
    resulting_context: tuple[ResultingContextEdge, ...] = ()
    # Explicit "no successor" answer, distinct from the field never being filled.
    resulting_context_none: bool = False
    affordance_refs: tuple[str, ...] = ()
    status: PatternStatus = PatternStatus.DRAFT
    provenance: dict[str, Provenance] = field(default_factory=dict)

    @property
    def live(self) -> bool:
        return self.status != PatternStatus.DROPPED

    def with_provenance(self, field_name: str, prov: Provenance) -> "PatternDraft":
        merged = dict(self.provenance)
        merged[field_name] = prov
        return replace(self, provenance=merged)


def uniform_provenance(prov: Provenance) -> dict[str, Provenance]:
    return {name: prov for name in PROVENANCE_FIELDS}


def live_patterns(patterns: Sequence[PatternDraft]) -> tuple[PatternDraft, ...]:
    return tuple(p for p in patterns if p.live)


def live_names(patterns: Sequence[PatternDraft]) -> tuple[str, ...]:
    return tuple(p.name for p in patterns if p.live)


def find_by_name(patterns: Sequence[PatternDraft], name: str) -> PatternDraft | None:
    wanted = normalize_name(name)
    for pattern in patterns:
        if normalize_name(pattern.name) == wanted:
            return pattern
    return None


@dataclass(frozen=True)
class CrossReferenceMatrix:
    """Affordance × pattern boolean grid with an optional note per true cell.

    rows are affordance ids in registry order; cols are live pattern names in
    session order. The grid is conformed whenever either side changes.
    """

    rows: tuple[str, ...] = ()
    cols: tuple[str, ...] = ()
    cells: tuple[tuple[bool, ...], ...] = ()
    notes: dict[tuple[str, str], str] = field(default_factory=dict)

    def cell(self, affordance_id: str, pattern_name: str) -> bool:
        try:
            r = self.rows.index(affordance_id)
            c = self.cols.index(pattern_name)
        except ValueError:
            return False
        return self.cells[r][c]

    def note(self, affordance_id: str, pattern_name: str) -> str | None:
        return self.notes.get((affordance_id, pattern_name))

    def true_cells(self) -> tuple[tuple[str, str], ...]:
        out = []
        for r, affordance_id in enumerate(self.rows):
            for c, pattern_name in enumerate(self.cols):
                if self.cells[r][c]:
                    out.append((affordance_id, pattern_name))
        return tuple(out)

    def true_count(self) -> int:
        return sum(1 for row in self.cells for value in row if value)

    def conform(self, rows: Sequence[str], cols: Sequence[str]) -> "CrossReferenceMatrix":
        """Resize to the given axes, keeping cells both axes still contain."""
        keep = {(a, p) for a, p in self.true_cells() if a in rows and p in cols}
        cells = tuple(tuple((a, p) in keep for p in cols) for a in rows)
        notes = {key: text for key, text in self.notes.items() if key in keep}
        return CrossReferenceMatrix(tuple(rows), tuple(cols), cells, notes)

    def with_cell(self, affordance_id: str, pattern_name: str, note: str | None = None) -> "CrossReferenceMatrix":
        r = self.rows.index(affordance_id)
        c = self.cols.index(pattern_name)
        cells = tuple(
            tuple(True if (i, j) == (r, c) else value for j, value in enumerate(row))
            for i, row in enumerate(self.cells)
        )
        notes = dict(self.notes)
        if note:
            notes[(affordance_id, pattern_name)] = note
        return replace(self, cells=cells, notes=notes)

    def renamed_column(self, old: str, new: str) -> "CrossReferenceMatrix":
        if old not in self.cols:
            return self
        cols = tuple(new if name == old else name for name in self.cols)
        notes = {(a, new if p == old else p): text for (a, p), text in self.notes.items()}
        return replace(self, cols=cols, notes=notes)

    def without_column(self, name: str) -> "CrossReferenceMatrix":
        if name not in self.cols:
            return self
        c = self.cols.index(name)
        cols = self.cols[:c] + self.cols[c + 1 :]
        cells = tuple(row[:c] + row[c + 1 :] for row in self.cells)
        notes = {key: text for key, text in self.notes.items() if key[1] != name}
        return CrossReferenceMatrix(self.rows, cols, cells, notes)


def empty_matrix() -> CrossReferenceMatrix:
    return CrossReferenceMatrix()


@dataclass(frozen=True)
class StoryEntry:
    pattern_name: str
    narrative: str


@dataclass(frozen=True)
class PatternStory:
    """Ordered walk through the patterns one known use applies."""

    known_use_id: str
    entries: tuple[StoryEntry, ...] = ()


@dataclass(frozen=True)
class RenameEntry:
    old_name: str
    new_name: str
    reason: str = ""
    renamed_at: str = ""


@dataclass(frozen=True)
class RenameMap:
    """Chronological log of renames; resolves historical names to current ones."""

    entries: tuple[RenameEntry, ...] = ()

    def appended(self, entry: RenameEntry) -> "RenameMap":
        return RenameMap(self.entries + (entry,))

    def current(self, name: str) -> str:
        """Follow the rename chain from ``name`` to its present-day spelling.

        A single chronological pass suffices: a later entry always renames a
        name as it was spelled at that point in time.
        """
        current = name
        current_norm = normalize_name(name)
        for entry in self.entries:
            if normalize_name(entry.old_name) == current_norm:
                current = entry.new_name
                current_norm = normalize_name(current)
        return current
