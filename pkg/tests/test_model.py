from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from patternbench.model import (
    CITATION_RE,
    KNOWN_USE_MARKER_RE,
    CrossReferenceMatrix,
    Origin,
    PatternDraft,
    PatternStatus,
    Provenance,
    RenameEntry,
    RenameMap,
    STEP_ORDER,
    StepId,
    ai_provenance,
    find_by_name,
    live_names,
    live_patterns,
    step_index,
    uniform_provenance,
)

# ---------------------------------------------------------------- steps


def test_step_order_has_eight_steps_in_process_order():
    assert [s.value for s in STEP_ORDER] == [
        "identify_examples",
        "extract_solutions",
        "define_problems",
        "distill_patterns",
        "identify_affordances",
        "relate_affordances",
        "refine",
        "consolidate",
    ]


def test_step_index_is_position_in_order():
    assert step_index(StepId.IDENTIFY_EXAMPLES) == 0
    assert step_index(StepId.CONSOLIDATE) == 7


# ---------------------------------------------------------------- provenance lattice

_actors = st.sampled_from([Origin.AI, Origin.HUMAN])


@given(st.sampled_from(list(Origin)), _actors)
def test_merged_same_actor_keeps_origin_otherwise_mixed(origin, actor):
    prov = Provenance(origin=origin, edited_at="t0")
    merged = prov.merged(actor, None, "t1")
    if actor == origin:
        assert merged.origin == origin
    else:
        assert merged.origin == Origin.MIXED
    assert merged.edited_at == "t1"


@given(st.lists(_actors, min_size=1, max_size=6))
def test_merged_never_returns_to_pure_ai_after_human_touch(actors):
    prov = ai_provenance("model-x", "t0")
    touched_by_human = False
    for i, actor in enumerate(actors):
        prov = prov.merged(actor, "model-x" if actor == Origin.AI else None, f"t{i + 1}")
        touched_by_human = touched_by_human or actor == Origin.HUMAN
        if touched_by_human:
            assert prov.origin != Origin.AI, "history with a human edit may not read as pure ai"


@given(st.lists(_actors, min_size=1, max_size=6))
def test_merged_is_order_insensitive_once_mixed(actors):
    # a mixed provenance stays mixed no matter who edits next
    prov = Provenance(origin=Origin.MIXED, edited_at="t0")
    for i, actor in enumerate(actors):
        prov = prov.merged(actor, None, f"t{i}")
        assert prov.origin == Origin.MIXED


def test_uniform_provenance_covers_every_field():
    stamp = ai_provenance("m", "t")
    prov = uniform_provenance(stamp)
    assert set(prov) == {
        "name",
        "context",
        "problem",
        "forces",
        "solution_statement",
        "solution_detail",
        "known_uses",
        "resulting_context",
    }
    assert all(p == stamp for p in prov.values())


# ---------------------------------------------------------------- citations


def test_citation_marker_excludes_known_use_pins():
    text = "Use [[Data Preprocessing]] as shown. [[ku:customer-support]]"
    assert CITATION_RE.findall(text) == ["Data Preprocessing"]
    assert KNOWN_USE_MARKER_RE.findall(text) == ["customer-support"]


def test_citation_marker_matches_multiword_and_ampersand():
    assert CITATION_RE.findall("([[semantic search & matching]])") == ["semantic search & matching"]


# ---------------------------------------------------------------- pattern collections


def _draft(name, status=PatternStatus.DRAFT):
    return PatternDraft(name=name, status=status)


def test_live_patterns_excludes_dropped():
    drafts = (_draft("A"), _draft("B", PatternStatus.DROPPED), _draft("C", PatternStatus.REFINED))
    assert live_names(drafts) == ("A", "C")
    assert [p.name for p in live_patterns(drafts)] == ["A", "C"]


def test_find_by_name_is_normalized():
    drafts = (_draft("Custom Logic"),)
    assert find_by_name(drafts, "  custom logic: ").name == "Custom Logic"
    assert find_by_name(drafts, "missing") is None


# ---------------------------------------------------------------- rename map


def test_rename_map_chains_chronologically():
    rm = RenameMap()
    rm = rm.appended(RenameEntry("Data Retrieval and Preprocessing", "Data Preparation", renamed_at="t1"))
    rm = rm.appended(RenameEntry("Data Preparation", "Data Preprocessing", renamed_at="t2"))
    assert rm.current("Data Retrieval and Preprocessing") == "Data Preprocessing"
    assert rm.current("data preparation") == "Data Preprocessing"
    assert rm.current("Unrelated") == "Unrelated"


def test_rename_map_does_not_apply_backwards():
    rm = RenameMap().appended(RenameEntry("Old", "New", renamed_at="t1"))
    assert rm.current("New") == "New"


# ---------------------------------------------------------------- matrix


def _matrix():
    return CrossReferenceMatrix(
        rows=("a1", "a2"),
        cols=("P", "Q"),
        cells=((True, False), (False, True)),
        notes={("a1", "P"): "why"},
    )


def test_matrix_cell_and_note_lookup():
    m = _matrix()
    assert m.cell("a1", "P") is True
    assert m.cell("a1", "Q") is False
    assert m.cell("zz", "P") is False, "unknown axes read as unmarked"
    assert m.note("a1", "P") == "why"
    assert m.note("a2", "Q") is None


def test_matrix_true_cells_and_count():
    m = _matrix()
    assert m.true_count() == 2
    assert set(m.true_cells()) == {("a1", "P"), ("a2", "Q")}


def test_with_cell_marks_and_records_note():
    m = _matrix().with_cell("a1", "Q", note="new")
    assert m.cell("a1", "Q") and m.note("a1", "Q") == "new"
    assert m.cell("a1", "P") is True, "other cells untouched"


def test_renamed_column_preserves_cells_and_notes():
    m = _matrix().renamed_column("P", "R")
    assert m.cols == ("R", "Q")
    assert m.cell("a1", "R") is True
    assert m.note("a1", "R") == "why"
    assert m.cell("a1", "P") is False, "old column name no longer exists"


def test_without_column_removes_only_that_column():
    m = _matrix().without_column("P")
    assert m.cols == ("Q",)
    assert m.cell("a2", "Q") is True
    assert m.true_count() == 1
    assert ("a1", "P") not in m.notes


def test_conform_reshapes_to_new_axes():
    m = _matrix().conform(rows=("a2", "a3"), cols=("Q",))
    assert m.rows == ("a2", "a3") and m.cols == ("Q",)
    assert m.cell("a2", "Q") is True, "surviving cells keep their value"
    assert m.cell("a3", "Q") is False, "new rows start empty"


def test_pattern_draft_with_provenance_merges_entries():
    stamp = ai_provenance("m", "t")
    draft = PatternDraft(name="A").with_provenance("problem", stamp)
    assert draft.provenance["problem"] == stamp
