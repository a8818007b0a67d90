"""Human curation operations: rename, drop, edit, and integrity validation.

All operations are pure ``Session -> Session`` transforms (the session type
is defined in :mod:`patternbench.engine`; only :func:`dataclasses.replace`
is used here, so there is no runtime dependency on it). Renames rewrite
every reference to the old name; drops tombstone the pattern and strip the
references of survivors, reporting what was removed in the audit log.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from . import errors
from .model import (
    CITATION_RE,
    EDITABLE_FIELDS,
    Origin,
    PatternDraft,
    PatternStatus,
    Provenance,
    RenameEntry,
    ResultingContextEdge,
    live_names,
    utc_now,
)
from .naming import normalize_name, resolve_name
from .parsing import split_known_use_citations

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Session


def _find_live(session: "Session", name: str) -> PatternDraft:
    match = resolve_name(name, live_names(session.patterns))
    if not match.resolved:
        raise errors.UnknownPattern(f"no live pattern named {name!r}")
    for pattern in session.patterns:
        if pattern.live and pattern.name == match.value:
            return pattern
    raise errors.UnknownPattern(f"no live pattern named {name!r}")  # pragma: no cover


def _replace_pattern(session: "Session", updated: PatternDraft, old_name: str) -> "Session":
    patterns = tuple(updated if p.name == old_name and p.live else p for p in session.patterns)
    return replace(session, patterns=patterns)


def _rewrite_citations(text: str, old: str, new: str) -> str:
    """Rewrite ``[[...]]`` citations whose body names ``old`` to name ``new``."""
    wanted = normalize_name(old)

    def swap(match) -> str:
        return f"[[{new}]]" if normalize_name(match.group(1)) == wanted else match.group(0)

    return CITATION_RE.sub(swap, text)


def rename_pattern(session: "Session", old: str, new: str, reason: str = "") -> "Session":
    """Rename a live pattern and every reference to it.

    Identical old and new spelling is a no-op. The new name must not collide
    with a different live pattern; the name's provenance becomes human and a
    RenameMap entry records the change.
    """
    pattern = _find_live(session, old)
    old = pattern.name
    if new == old:
        return session
    if not new.strip():
        raise errors.DuplicateName("new name must be nonempty")
    for other in session.patterns:
        if other.live and other.name != old and normalize_name(other.name) == normalize_name(new):
            raise errors.DuplicateName(f"a live pattern named {other.name!r} already exists")

    now = utc_now()
    patterns = []
    for p in session.patterns:
        if not p.live:
            patterns.append(p)
            continue
        if p.name == old:
            p = replace(p, name=new).with_provenance("name", Provenance(Origin.HUMAN, None, now))
        if any(normalize_name(e.target) == normalize_name(old) for e in p.resulting_context):
            edges = tuple(
                replace(e, target=new, rationale=_rewrite_citations(e.rationale, old, new))
                if normalize_name(e.target) == normalize_name(old)
                else e
                for e in p.resulting_context
            )
            p = replace(p, resulting_context=edges)
        patterns.append(p)

    stories = tuple(
        replace(
            story,
            entries=tuple(
                replace(entry, pattern_name=new) if entry.pattern_name == old else entry
                for entry in story.entries
            ),
        )
        for story in session.stories
    )
    session = replace(
        session,
        patterns=tuple(patterns),
        matrix=session.matrix.renamed_column(old, new),
        stories=stories,
        rename_map=session.rename_map.appended(RenameEntry(old, new, reason, now)),
    )
    return session.logged("human", "rename_pattern", f"{old!r} -> {new!r}" + (f" ({reason})" if reason else ""))


def drop_pattern(session: "Session", name: str, reason: str = "") -> "Session":
    """Tombstone a pattern; survivors lose only their edges into it.

    The dropped pattern keeps all of its fields for the audit trail. Removed
    incoming edges and story entries are reported in the audit log entry.
    """
    pattern = _find_live(session, name)
    name = pattern.name

    removed_edges: list[str] = []
    patterns = []
    for p in session.patterns:
        if not p.live:
            patterns.append(p)
            continue
        if p.name == name:
            patterns.append(replace(p, status=PatternStatus.DROPPED))
            continue
        kept = tuple(e for e in p.resulting_context if normalize_name(e.target) != normalize_name(name))
        if len(kept) != len(p.resulting_context):
            removed_edges.append(f"{p.name} -> {name}")
            p = replace(p, resulting_context=kept)
        patterns.append(p)

    removed_entries: list[str] = []
    stories = []
    for story in session.stories:
        kept_entries = tuple(e for e in story.entries if e.pattern_name != name)
        if len(kept_entries) != len(story.entries):
            removed_entries.append(story.known_use_id)
        stories.append(replace(story, entries=kept_entries))

    session = replace(
        session,
        patterns=tuple(patterns),
        matrix=session.matrix.without_column(name),
        stories=tuple(stories),
    )
    detail = f"{name!r}" + (f" ({reason})" if reason else "")
    if removed_edges:
        detail += "; removed edges: " + ", ".join(removed_edges)
    if removed_entries:
        detail += "; removed story entries for: " + ", ".join(removed_entries)
    return session.logged("human", "drop_pattern", detail)


def _parse_resulting_context_text(
    session: "Session", source: PatternDraft, text: str
) -> tuple[tuple[ResultingContextEdge, ...], bool]:
    """Interpret an edited resulting-context text.

    "None" (any case, optional period) marks an explicit no-successor answer.
    Otherwise each ``[[Target]]`` citation becomes one edge sharing the full
    text as rationale; citations must resolve to a live pattern.
    """
    body = text.strip()
    if not body:
        return (), False
    if body.rstrip(".!").strip().casefold() in ("none", "n/a", "no resulting context"):
        return (), True
    live = [n for n in live_names(session.patterns) if n != source.name]
    targets: list[str] = []
    for cited in CITATION_RE.findall(body):
        match = resolve_name(session.rename_map.current(cited), live)
        if not match.resolved:
            raise errors.UnknownPattern(f"resulting-context citation {cited!r} matches no live pattern")
        if match.value not in targets:
            targets.append(match.value)
    if not targets:
        raise errors.UnknownPattern("resulting-context text cites no live pattern (use [[Name]] or 'None')")
    return tuple(ResultingContextEdge(target, body) for target in targets), False


def edit_field(
    session: "Session",
    pattern_name: str,
    field_name: str,
    text: str,
    actor: Origin,
    model_id: str | None = None,
) -> "Session":
    """Replace one editable field of a live pattern and update its provenance.

    Prose fields store the text as given. ``known_uses`` expects the
    ``note [[ku:<id>]]`` citation encoding; ``resulting_context`` expects
    prose with ``[[Target]]`` citations or the literal "None". An edit with
    identical text still updates provenance to record the review.
    """
    if actor not in (Origin.AI, Origin.HUMAN):
        raise errors.InvariantViolation("actor must be ai or human")
    if field_name not in EDITABLE_FIELDS:
        raise errors.UnknownField(f"{field_name!r} is not an editable pattern field")
    pattern = _find_live(session, pattern_name)

    if field_name == "known_uses":
        refs = split_known_use_citations(text)
        known_ids = {ku.id for ku in session.known_uses}
        for ref in refs:
            if ref.known_use_id is None:
                raise errors.UnknownKnownUse(
                    "known-uses text must pin every note with a [[ku:<id>]] marker"
                )
            if ref.known_use_id not in known_ids:
                raise errors.UnknownKnownUse(f"unknown known-use id {ref.known_use_id!r}")
        updated = replace(pattern, known_uses=tuple(refs))
    elif field_name == "resulting_context":
        edges, explicit_none = _parse_resulting_context_text(session, pattern, text)
        updated = replace(pattern, resulting_context=edges, resulting_context_none=explicit_none)
    else:
        updated = replace(pattern, **{field_name: text})

    prior = pattern.provenance.get(field_name, Provenance(Origin.AI))
    updated = updated.with_provenance(field_name, prior.merged(actor, model_id, utc_now()))
    session = _replace_pattern(session, updated, pattern.name)
    return session.logged(actor.value, "edit_field", f"{pattern.name!r}.{field_name}")


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # error | warning
    message: str
    pattern: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(issue.severity == "error" for issue in self.issues)

    def __bool__(self) -> bool:
        return not self.issues


def validate_language(session: "Session") -> ValidationReport:
    """Check referential integrity of the whole session; report, never raise.

    Flags unresolved known-use ids, resulting-context targets, and citations;
    live patterns with no known use; solution-detail citations not backed by
    affordance_refs/matrix; and matrix axes out of step with the registry or
    the live pattern list.
    """
    issues: list[ValidationIssue] = []
    live = live_names(session.patterns)
    known_ids = {ku.id for ku in session.known_uses}
    affordance_names = [a.name for a in session.registry]
    by_name = {normalize_name(a.name): a for a in session.registry}
    registry_ids = {a.id for a in session.registry}

    def error(message: str, pattern: str | None = None) -> None:
        issues.append(ValidationIssue("error", message, pattern))

    def warn(message: str, pattern: str | None = None) -> None:
        issues.append(ValidationIssue("warning", message, pattern))

    seen_names: set[str] = set()
    for pattern in session.patterns:
        if not pattern.live:
            continue
        key = normalize_name(pattern.name)
        if key in seen_names:
            error(f"duplicate live pattern name {pattern.name!r}", pattern.name)
        seen_names.add(key)

        if not pattern.known_uses:
            warn("pattern has no known-use reference", pattern.name)
        for ref in pattern.known_uses:
            if ref.known_use_id not in known_ids:
                error(f"known-use reference {ref.known_use_id!r} does not resolve", pattern.name)

        for edge in pattern.resulting_context:
            if not resolve_name(session.rename_map.current(edge.target), live).resolved:
                error(f"resulting-context target {edge.target!r} does not resolve", pattern.name)

        for ref_id in pattern.affordance_refs:
            if ref_id not in registry_ids:
                error(f"affordance_ref {ref_id!r} is not in the registry", pattern.name)

        for cited in CITATION_RE.findall(pattern.solution_detail):
            match = resolve_name(cited, affordance_names)
            if not match.resolved:
                warn(f"solution-detail citation {cited!r} matches no affordance", pattern.name)
                continue
            affordance = by_name[normalize_name(match.value)]
            if affordance.id not in pattern.affordance_refs:
                warn(f"cited affordance {cited!r} is absent from affordance_refs", pattern.name)
            elif not session.matrix.cell(affordance.id, pattern.name):
                warn(f"cited affordance {cited!r} is not marked in the matrix", pattern.name)

    if session.matrix.rows or session.matrix.cols:
        if list(session.matrix.rows) != [a.id for a in session.registry]:
            error("matrix rows do not match the affordance registry")
        if list(session.matrix.cols) != list(live):
            error("matrix columns do not match the live pattern list")

    for story in session.stories:
        if story.known_use_id not in known_ids:
            error(f"story references unknown known use {story.known_use_id!r}")
        for entry in story.entries:
            if not resolve_name(entry.pattern_name, live).resolved:
                error(f"story entry {entry.pattern_name!r} does not resolve to a live pattern")

    return ValidationReport(tuple(issues))
