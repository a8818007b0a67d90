"""Acceptance gate: one test per shipping criterion, each a single pass/fail
line under pytest. Everything runs offline against the recorded fixture or
scripted fakes."""

from __future__ import annotations

import json
import os
import random
import signal
import subprocess
import sys
import time
from pathlib import Path

import pytest
from hypothesis import given, settings

import strategies as st_local
from corpus import KNOWN_USES, RUN_RESPONSES
from patternbench import errors
from patternbench.curation import drop_pattern, rename_pattern
from patternbench.engine import MiningEngine
from patternbench.gateway import ChatMessage
from patternbench.model import Component, STEP_ORDER, StepId, StepStatus, step_index
from patternbench.parsing import parse_pattern_shortforms
from patternbench.render import lint_alexandrian, render_language, render_pattern_alexandrian, render_shortform
from patternbench.sample import (
    SAMPLE_SESSION_ID,
    apply_sample_curation,
    make_sample_engine,
    run_sample_pipeline,
)
from patternbench.store import SessionStore, decode_session, encode_session

GOLDEN_DIR = Path(__file__).parent / "goldens"

SOLUTION_NAMES = [
    "Data Preprocessing",
    "Data Structuring and Enhancement",
    "Integration with External Tools",
    "Semantic Understanding and Synthesis",
    "Iterative Refinement and Feedback",
    "Custom Application Logic",
    "Adaptive Response Generation",
]

DRAFT_NAMES = [
    "Data Retrieval and Preprocessing",
    "Data Structuring and Enhancement",
    "Integration with External Tools",
    "Semantic Understanding and Synthesis",
    "Iterative Refinement and Feedback",
    "Adaptive Response Generation",
    "Custom Application Logic",
]

REGISTRY_NAMES = {
    Component.LLM: [
        "Natural language understanding",
        "Content generation",
        "Semantic search and matching",
        "Adaptive learning",
    ],
    Component.DATABASE: [
        "Structured data storage",
        "Semantic indexing and retrieval",
        "Scalability and performance",
        "Data organization and categorization",
    ],
    Component.EXTERNAL_TOOL: [
        "Specialized analytical capabilities",
        "Data preprocessing and enhancement",
        "Efficiency and optimization",
        "Interoperability and integration",
    ],
}

MARKED_CELLS = {
    ("adaptive-learning", "Integration with External Tools"),
    ("adaptive-learning", "Iterative Refinement and Feedback"),
    ("content-generation", "Adaptive Response Generation"),
    ("content-generation", "Custom Application Logic"),
    ("content-generation", "Data Retrieval and Preprocessing"),
    ("data-organization-and-categorization", "Custom Application Logic"),
    ("data-preprocessing-and-enhancement", "Data Retrieval and Preprocessing"),
    ("interoperability-and-integration", "Custom Application Logic"),
    ("natural-language-understanding", "Adaptive Response Generation"),
    ("natural-language-understanding", "Semantic Understanding and Synthesis"),
    ("scalability-and-performance", "Iterative Refinement and Feedback"),
    ("semantic-indexing-and-retrieval", "Data Structuring and Enhancement"),
    ("semantic-search-and-matching", "Data Structuring and Enhancement"),
    ("specialized-analytical-capabilities", "Data Structuring and Enhancement"),
    ("specialized-analytical-capabilities", "Integration with External Tools"),
    ("structured-data-storage", "Data Structuring and Enhancement"),
}

CURATED_NAMES = [
    "Data Preprocessing",
    "Data Structuring and Enhancement",
    "Tool Integration",
    "Semantic Understanding and Synthesis",
    "Adaptive Response",
    "Custom Logic",
]


def _normalized(text: str) -> str:
    lines = [" ".join(line.split()) for line in text.splitlines()]
    return "\n".join(line for line in lines if line)


# ---------------------------------------------------------------- criterion 1


def test_replay_reproduces_the_recorded_run_quickly():
    started = time.monotonic()
    engine = make_sample_engine()
    session = run_sample_pipeline(engine)
    elapsed = time.monotonic() - started

    assert [s.name for s in session.solutions] == SOLUTION_NAMES
    assert [p.name for p in session.patterns] == DRAFT_NAMES

    by_component = {component: [] for component in Component}
    for affordance in session.registry:
        by_component[affordance.component].append(affordance.name)
    assert by_component[Component.LLM] == REGISTRY_NAMES[Component.LLM]
    assert by_component[Component.DATABASE] == REGISTRY_NAMES[Component.DATABASE]
    assert by_component[Component.EXTERNAL_TOOL] == REGISTRY_NAMES[Component.EXTERNAL_TOOL]
    assert by_component[Component.OTHER] == []

    matrix = session.matrix
    assert (len(matrix.rows), len(matrix.cols)) == (12, 7)
    assert set(matrix.true_cells()) == MARKED_CELLS
    assert matrix.true_count() == 16

    custom = next(p for p in session.patterns if p.name == "Custom Application Logic")
    assert [e.target for e in custom.resulting_context] == ["Integration with External Tools"]

    assert elapsed < 10.0, f"replay took {elapsed:.2f}s"


# ---------------------------------------------------------------- criterion 2


def test_curation_produces_the_six_final_names_and_summary_table(sample_engine, pipeline_session):
    session = apply_sample_curation(sample_engine, pipeline_session)
    assert [p.name for p in session.patterns if p.live] == CURATED_NAMES

    body = render_language(session).body
    table = "\n".join(line for line in body.splitlines() if line.startswith("|"))
    golden = (GOLDEN_DIR / "language_summary.md").read_text(encoding="utf-8")
    assert _normalized(table) == _normalized(golden)


# ---------------------------------------------------------------- criterion 3


def test_story_for_the_research_assistant_example(demo_session):
    story = next(s for s in demo_session.stories if s.known_use_id == "research-assistant")
    assert [entry.pattern_name for entry in story.entries] == [
        "Data Preprocessing",
        "Data Structuring and Enhancement",
        "Tool Integration",
        "Semantic Understanding and Synthesis",
        "Custom Logic",
    ]


# ---------------------------------------------------------------- criterion 4


@settings(max_examples=200)
@given(st_local.shortform_drafts())
def test_shortform_rendering_round_trips(draft):
    parsed, diagnostics = parse_pattern_shortforms(render_shortform(draft).body)
    assert diagnostics == []
    assert len(parsed) == 1
    got = parsed[0]
    assert got.name == draft.name
    assert got.context == draft.context
    assert got.problem == draft.problem
    assert got.forces == draft.forces
    assert got.solution_statement == draft.solution_statement
    assert got.known_uses == draft.known_uses


# ---------------------------------------------------------------- criterion 5


class _LoopClient:
    """Answers every step with its canned response, indefinitely."""

    model_id = "looped"

    def __init__(self):
        self.positions: dict[StepId | None, int] = {}

    def complete(self, transcript, new_user_message, step_tag=None):
        canned = RUN_RESPONSES.get(step_tag)
        assert canned, f"unexpected model call for step {step_tag!r}"
        index = self.positions.get(step_tag, 0)
        self.positions[step_tag] = (index + 1) % len(canned)
        user = ChatMessage("user", new_user_message, step_tag, "t")
        assistant = ChatMessage("assistant", canned[index], step_tag, "t")
        return transcript.extend(user, assistant), assistant


def _check_ordering(session) -> None:
    statuses = [session.status_of(step) for step in STEP_ORDER]
    approved = [s == StepStatus.APPROVED for s in statuses]
    assert approved == sorted(approved, reverse=True), "approved steps must form a prefix"
    touched = [s != StepStatus.PENDING for s in statuses]
    assert touched == sorted(touched, reverse=True), "steps must be reached in order"
    assert sum(s == StepStatus.AWAITING_REVIEW for s in statuses) <= 1


def test_random_operation_sequences_preserve_the_step_invariants():
    rng = random.Random(20240101)
    for _ in range(1000):
        engine = MiningEngine(client=_LoopClient(), clock=lambda: "t")
        session = engine.new_session("fuzzed")
        for _ in range(rng.randint(4, 10)):
            op = rng.choice(("ingest", "run", "approve", "rerun"))
            step = rng.choice(STEP_ORDER)
            before = session
            try:
                if op == "ingest":
                    session = engine.ingest_examples(session, KNOWN_USES)
                elif op == "run":
                    session = engine.run_step(session, step)
                elif op == "approve":
                    session = engine.approve_step(session, step)
                else:
                    session = engine.rerun_step(session, step)
            except errors.WorkbenchError:
                assert session is before  # rejected ops must not mutate
                continue
            _check_ordering(session)
            if op in ("rerun", "ingest"):
                start = 0 if op == "ingest" else step_index(step)
                for later in STEP_ORDER[start + 1 :]:
                    was = before.status_of(later)
                    now = session.status_of(later)
                    if was == StepStatus.PENDING:
                        assert now == StepStatus.PENDING
                    else:
                        assert now == StepStatus.STALE, f"{later} must go stale, not {now}"


# ---------------------------------------------------------------- criterion 6


def test_every_rendered_document_lints_clean(demo_session):
    names = [p.name for p in demo_session.patterns if p.live]
    documents = [render_language(demo_session)]
    documents += [
        render_pattern_alexandrian(p) for p in demo_session.patterns if p.live
    ]
    for document in documents:
        diagnostics = lint_alexandrian(
            document,
            registry=demo_session.registry,
            matrix=demo_session.matrix,
            pattern_names=names,
        )
        assert [d for d in diagnostics if d.severity == "error"] == [], document.body[:60]


# ---------------------------------------------------------------- criterion 7


@settings(max_examples=100, deadline=None)
@given(st_local.sessions())
def test_persistence_round_trips_random_sessions(session):
    assert decode_session(json.loads(json.dumps(encode_session(session)))) == session


_KILL_CHILD = """
import sys
from types import SimpleNamespace
from patternbench.engine import MiningEngine
from patternbench.store import SessionStore

store = SessionStore(sys.argv[1])
engine = MiningEngine(client=SimpleNamespace(model_id="noop"))
session = engine.new_session("victim")
print("ready", flush=True)
while True:
    store.save(session)
"""


def test_kill_during_save_leaves_the_previous_file_intact(tmp_path):
    store = SessionStore(tmp_path)
    engine = MiningEngine(client=_LoopClient(), clock=lambda: "2024-01-01T00:00:00+00:00")
    original = engine.new_session("victim")
    store.save(original)

    for attempt in range(3):
        child = subprocess.Popen(
            [sys.executable, "-c", _KILL_CHILD, str(tmp_path)],
            stdout=subprocess.PIPE,
            text=True,
        )
        try:
            assert child.stdout.readline().strip() == "ready"
            time.sleep(0.01 * (attempt + 1))
            os.kill(child.pid, signal.SIGKILL)
        finally:
            child.wait(timeout=10)
        # whatever instant the writer died at, the session file still loads
        survivor = store.load("victim")
        assert survivor.id == "victim"

    with pytest.raises(errors.IoError):
        SessionStore(tmp_path / "missing").load("victim")
