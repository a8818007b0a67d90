"""Hypothesis strategies for drafts and whole sessions.

Generated values are "well formed": single-line prose, unique names and
ids, and cross-references that resolve, so they satisfy the invariants the
store enforces on load.
"""

from __future__ import annotations

import string
from dataclasses import replace as dc_replace

from hypothesis import strategies as st

from patternbench.engine import AuditEvent, Session, initial_step_status
from patternbench.gateway import ChatMessage, Transcript
from patternbench.naming import normalize_name
from patternbench.parsing import ParseDiagnostic
from patternbench.model import (
    Affordance,
    CandidateSolution,
    Component,
    CrossReferenceMatrix,
    KnownUse,
    KnownUseRef,
    Origin,
    PatternDraft,
    PatternStatus,
    PatternStory,
    ProblemStatement,
    Provenance,
    RenameEntry,
    RenameMap,
    ResultingContextEdge,
    STEP_ORDER,
    StepId,
    StoryEntry,
    StepStatus,
)

_WORD = st.text(alphabet=string.ascii_lowercase, min_size=2, max_size=8)
_SECTION_LABELS = {"context", "problem", "forces", "solution", "known uses", "resulting context"}


@st.composite
def names(draw, min_words: int = 1, max_words: int = 4) -> str:
    words = draw(st.lists(_WORD, min_size=min_words, max_size=max_words))
    name = " ".join(w.capitalize() for w in words)
    if name.casefold() in _SECTION_LABELS:
        name += " X"
    return name


# prose that survives a line-oriented parse: single line, no citation or
# heading markup, starts and ends on a word
_PROSE_CHARS = string.ascii_letters + string.digits + " ,;'()-"


@st.composite
def prose(draw, max_size: int = 60) -> str:
    body = draw(st.text(alphabet=_PROSE_CHARS, min_size=1, max_size=max_size))
    cleaned = " ".join(body.split()).strip("-,; '()")
    return cleaned or "plain text"


def slugs() -> st.SearchStrategy[str]:
    return st.builds(lambda ws: "-".join(ws), st.lists(_WORD, min_size=1, max_size=3, unique=True))


def provenances() -> st.SearchStrategy[Provenance]:
    return st.builds(
        Provenance,
        origin=st.sampled_from(list(Origin)),
        model_id=st.one_of(st.none(), st.just("model-x")),
        edited_at=st.just("2024-01-01T00:00:00+00:00"),
    )


@st.composite
def known_use_sets(draw, min_size: int = 1, max_size: int = 3) -> tuple[KnownUse, ...]:
    ids = draw(st.lists(slugs(), min_size=min_size, max_size=max_size, unique=True))
    return tuple(
        KnownUse(id=i, name=i.replace("-", " ").title(), narrative=draw(prose(120))) for i in ids
    )


@st.composite
def registries(draw, max_size: int = 4) -> tuple[Affordance, ...]:
    ids = draw(st.lists(slugs(), min_size=0, max_size=max_size, unique=True))
    return tuple(
        Affordance(
            id=i,
            component=draw(st.sampled_from(list(Component))),
            name=i.replace("-", " ").capitalize(),
            description=draw(prose()),
        )
        for i in ids
    )


def known_use_refs_lists() -> st.SearchStrategy[list[KnownUseRef]]:
    """Resolved refs with non-empty notes, the citation-codec round-trip domain."""
    return st.lists(st.builds(KnownUseRef, known_use_id=slugs(), note=prose()), max_size=6)


@st.composite
def shortform_drafts(draw) -> PatternDraft:
    """Drafts whose shortform rendering parses back exactly."""
    ku_ids = draw(st.lists(slugs(), min_size=1, max_size=3, unique=True))
    refs = tuple(KnownUseRef(known_use_id=i, note=draw(prose())) for i in ku_ids)
    return PatternDraft(
        name=draw(names()),
        context=draw(prose()),
        problem=draw(prose()),
        forces=draw(prose()),
        solution_statement=draw(prose()),
        known_uses=refs,
    )


@st.composite
def sessions(draw) -> Session:
    """Valid whole sessions: every cross-reference resolves."""
    known_uses = draw(known_use_sets())
    registry = draw(registries())
    pattern_names = draw(st.lists(names(min_words=2), min_size=0, max_size=4, unique_by=lambda n: n.casefold()))

    patterns = []
    for i, name in enumerate(pattern_names):
        status = draw(st.sampled_from(list(PatternStatus)))
        live_targets = [n for n in pattern_names if n != name]
        edge_targets = draw(st.lists(st.sampled_from(live_targets), max_size=2, unique=True)) if live_targets else []
        edges = tuple(ResultingContextEdge(target=t, rationale=f"[[{t}]] follows") for t in edge_targets)
        refs = tuple(
            KnownUseRef(known_use_id=draw(st.sampled_from([ku.id for ku in known_uses])), note=draw(prose()))
            for _ in range(draw(st.integers(0, 2)))
        )
        affordance_refs = tuple(
            draw(st.lists(st.sampled_from([a.id for a in registry]), max_size=2, unique=True))
            if registry
            else ()
        )
        patterns.append(
            PatternDraft(
                name=name,
                context=draw(prose()),
                problem=draw(prose()),
                forces=draw(prose()),
                solution_statement=draw(prose()),
                solution_detail=draw(prose()),
                known_uses=refs,
                resulting_context=edges if status != PatternStatus.DROPPED else (),
                resulting_context_none=draw(st.booleans()) if not edges else False,
                affordance_refs=affordance_refs,
                status=status,
                provenance={"problem": draw(provenances())},
            )
        )
    # dropped targets in RC edges would be dangling; restrict edges to live names
    live = [p.name for p in patterns if p.status != PatternStatus.DROPPED]
    patterns = [
        p
        if p.status == PatternStatus.DROPPED
        else dc_replace(p, resulting_context=tuple(e for e in p.resulting_context if e.target in live))
        for p in patterns
    ]

    build_matrix = draw(st.booleans()) and registry and live
    if build_matrix:
        rows = tuple(a.id for a in registry)
        cols = tuple(live)
        cells = tuple(tuple(draw(st.booleans()) for _ in cols) for _ in rows)
        notes = {}
        for ri, row in enumerate(rows):
            for ci, col in enumerate(cols):
                if cells[ri][ci] and draw(st.booleans()):
                    notes[(row, col)] = draw(prose())
        matrix = CrossReferenceMatrix(rows=rows, cols=cols, cells=cells, notes=notes)
    else:
        matrix = CrossReferenceMatrix()

    stories = ()
    if live and known_uses and draw(st.booleans()):
        ku = draw(st.sampled_from(list(known_uses)))
        entries = tuple(
            StoryEntry(pattern_name=draw(st.sampled_from(live)), narrative=draw(prose()))
            for _ in range(draw(st.integers(1, 3)))
        )
        stories = (PatternStory(known_use_id=ku.id, entries=entries),)

    rename_map = RenameMap()
    for p in patterns[:1]:
        old = draw(names())
        # an old name that matches any current pattern would shadow it when
        # references resolve through the rename chain
        taken = {normalize_name(n) for n in pattern_names}
        if normalize_name(old) not in taken:
            rename_map = rename_map.appended(
                RenameEntry(old_name=old, new_name=p.name, reason=draw(prose()), renamed_at="2024-01-01T00:00:00+00:00")
            )

    messages = []
    for i in range(draw(st.integers(0, 3))):
        tag = draw(st.one_of(st.none(), st.sampled_from(list(StepId))))
        messages.append(ChatMessage(role="user", content=draw(prose()), step_tag=tag, timestamp="t"))
        messages.append(ChatMessage(role="assistant", content=draw(prose()), step_tag=tag, timestamp="t"))
    transcript = Transcript(messages=tuple(messages), model_id="replay")

    statuses = initial_step_status()
    approved_upto = draw(st.integers(0, len(STEP_ORDER)))
    for i, step in enumerate(STEP_ORDER):
        if i < approved_upto:
            statuses[step] = StepStatus.APPROVED
        elif i == approved_upto:
            statuses[step] = draw(st.sampled_from([StepStatus.PENDING, StepStatus.AWAITING_REVIEW]))

    audit = tuple(
        AuditEvent(at="2024-01-01T00:00:00+00:00", actor=draw(st.sampled_from(["ai", "human"])), action="edit", detail=draw(prose()))
        for _ in range(draw(st.integers(0, 2)))
    )

    step_diagnostics = {}
    if draw(st.booleans()):
        step = draw(st.sampled_from(list(StepId)))
        step_diagnostics[step] = (
            ParseDiagnostic(
                severity=draw(st.sampled_from(["warning", "error"])),
                message=draw(prose()),
                line=draw(st.one_of(st.none(), st.integers(1, 50))),
            ),
        )

    return Session(
        id=draw(slugs()),
        created_at="2024-01-01T00:00:00+00:00",
        known_uses=known_uses,
        solutions=tuple(CandidateSolution(name=draw(names()), description=draw(prose())) for _ in range(draw(st.integers(0, 2)))),
        problems=tuple(
            ProblemStatement(solution_name=draw(st.one_of(st.none(), names())), text=draw(prose()))
            for _ in range(draw(st.integers(0, 2)))
        ),
        patterns=tuple(patterns),
        registry=registry,
        matrix=matrix,
        stories=stories,
        rename_map=rename_map,
        transcript=transcript,
        step_status=statuses,
        step_diagnostics=step_diagnostics,
        missing_suggestions=tuple(draw(st.lists(names(), max_size=2))),
        process_summary=draw(st.one_of(st.just(""), prose())),
        audit_log=audit,
    )
