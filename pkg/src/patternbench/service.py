"""HTTP service exposing the mining pipeline over a JSON API.

The service is stateless over the session store: every mutation is
load -> transform -> atomic save under the per-session file lock, so
concurrent requests against one session serialize while reads see a
consistent snapshot. All session payloads use the same JSON vocabulary
as the session files on disk.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from typing import Any, Callable

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, errors
from .curation import drop_pattern, edit_field, rename_pattern, validate_language
from .engine import MiningEngine, Session
from .gateway import make_client, record
from .ingest import parse_example_text
from .model import Origin, STEP_ORDER, StepId, find_by_name, live_patterns
from .render import (
    DocumentKind,
    export_log,
    render_language,
    render_matrix,
    render_pattern_alexandrian,
    render_shortform,
    render_story,
)
from .sample import build_demo_session
from .store import SessionStore, encode_session


def _packaged_fixture_path() -> str:
    return str(resources.files("patternbench").joinpath("data/samples/llm-integration.replay.txt"))


@dataclass(frozen=True)
class Config:
    """Runtime wiring: gateway mode and credentials, plus the session directory."""

    endpoint: str = ""
    model_id: str = "replay"
    mode: str = "replay"  # live | record | replay
    fixture_path: str = ""
    data_dir: str = "sessions"

    @classmethod
    def from_env(cls, **overrides: Any) -> "Config":
        values: dict[str, Any] = {
            "endpoint": os.environ.get("PATTERNBENCH_ENDPOINT", ""),
            "model_id": os.environ.get("PATTERNBENCH_MODEL", "replay"),
            "mode": os.environ.get("PATTERNBENCH_MODE", "replay"),
            "fixture_path": os.environ.get("PATTERNBENCH_FIXTURE", ""),
            "data_dir": os.environ.get("PATTERNBENCH_DATA_DIR", "sessions"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def resolved_fixture(self) -> str:
        # replay without an explicit fixture falls back to the packaged demo
        if not self.fixture_path and self.mode == "replay":
            return _packaged_fixture_path()
        return self.fixture_path

    def check(self) -> "Config":
        if self.mode not in ("live", "record", "replay"):
            raise errors.IoError(f"unknown gateway mode {self.mode!r}")
        if self.mode in ("record", "replay") and not self.resolved_fixture():
            raise errors.IoError(f"{self.mode} mode needs a fixture path")
        return self


def _status_for(exc: errors.WorkbenchError) -> int:
    if isinstance(exc, (errors.UnknownPattern, errors.UnknownKnownUse, errors.UnknownStep)):
        return 404
    if isinstance(exc, (errors.OutOfOrder, errors.NotAwaitingReview, errors.DuplicateName, errors.NeverRun)):
        return 409
    if isinstance(exc, (errors.ReplayMiss, errors.ProviderError)):
        return 502
    if isinstance(exc, (errors.IoError, errors.SchemaMismatch, errors.InvariantViolation)):
        return 500
    return 422


def _parse_step(raw: str) -> StepId:
    try:
        return StepId(raw.strip().lower().replace("-", "_"))
    except ValueError:
        raise errors.UnknownStep(f"unknown step {raw!r}") from None


# ---------------------------------------------------------------- request bodies


class CreateSessionBody(BaseModel):
    session_id: str | None = None
    demo: bool = False


class ExampleDoc(BaseModel):
    text: str
    name: str | None = None


class IngestBody(BaseModel):
    examples: list[ExampleDoc]
    append: bool = False


class EditBody(BaseModel):
    field: str
    text: str
    actor: str = Field(default="human", pattern="^(human|ai)$")
    model_id: str | None = None


class RenameBody(BaseModel):
    new_name: str
    reason: str = ""


class DropBody(BaseModel):
    reason: str = ""


class StoryBody(BaseModel):
    known_use_id: str


# ---------------------------------------------------------------- app factory


def _step_artifacts(session: Session, step: StepId, enc: dict[str, Any]) -> dict[str, Any]:
    """The slice of the session vocabulary that a step produces."""
    if step == StepId.IDENTIFY_EXAMPLES:
        return {"known_uses": enc["known_uses"]}
    if step == StepId.EXTRACT_SOLUTIONS:
        return {"solutions": enc["solutions"]}
    if step == StepId.DEFINE_PROBLEMS:
        return {"problems": enc["problems"]}
    if step == StepId.DISTILL_PATTERNS:
        return {"patterns": enc["patterns"]}
    if step == StepId.IDENTIFY_AFFORDANCES:
        return {"registry": enc["registry"]}
    if step == StepId.RELATE_AFFORDANCES:
        return {"matrix": enc["matrix"], "registry": enc["registry"]}
    if step == StepId.REFINE:
        return {
            "patterns": enc["patterns"],
            "missing_suggestions": enc["missing_suggestions"],
        }
    return {
        "stories": enc["stories"],
        "process_summary": enc["process_summary"],
    }


def _timeline(session: Session) -> list[dict[str, Any]]:
    enc = encode_session(session)
    out = []
    for step in STEP_ORDER:
        raw = session.transcript.last_response_for(step)
        out.append(
            {
                "step": step.value,
                "status": session.status_of(step).value,
                "raw_response": raw.content if raw else None,
                "artifacts": _step_artifacts(session, step, enc),
                "diagnostics": enc["step_diagnostics"].get(step.value, []),
            }
        )
    return out


def create_app(config: Config | None = None) -> FastAPI:
    cfg = (config or Config.from_env()).check()
    store = SessionStore(cfg.data_dir)
    client = make_client(
        cfg.mode, fixture_path=cfg.resolved_fixture() or None, endpoint=cfg.endpoint, model_id=cfg.model_id
    )
    engine = MiningEngine(client)
    app = FastAPI(title="patternbench", version=__version__)
    # the review UI is served as static files from wherever is convenient
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(errors.WorkbenchError)
    async def _domain_error(_request, exc: errors.WorkbenchError):
        return JSONResponse(status_code=_status_for(exc), content={"error": type(exc).__name__, "detail": str(exc)})

    def require(session_id: str) -> None:
        if not store.exists(session_id):
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    def mutate(session_id: str, fn: Callable[[Session], Session]) -> Session:
        require(session_id)
        session = store.mutate(session_id, fn)
        if cfg.mode == "record" and session.transcript.pairs():
            record(session.transcript, cfg.resolved_fixture())
        return session

    def session_payload(session: Session) -> dict[str, Any]:
        return {"session": encode_session(session)}

    # ------------------------------------------------------------ sessions

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict[str, Any]:
        if body.session_id and store.exists(body.session_id):
            raise errors.DuplicateName(f"session {body.session_id!r} already exists")
        session = build_demo_session(body.session_id or "demo") if body.demo else engine.new_session(body.session_id)
        if store.exists(session.id):
            raise errors.DuplicateName(f"session {session.id!r} already exists")
        store.save(session)
        return session_payload(session)

    @app.get("/sessions")
    def list_sessions() -> dict[str, Any]:
        return {"sessions": store.list_ids()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        require(session_id)
        return session_payload(store.load(session_id))

    # ------------------------------------------------------------ examples and steps

    @app.post("/sessions/{session_id}/examples")
    def ingest_examples(session_id: str, body: IngestBody) -> dict[str, Any]:
        def apply(session: Session) -> Session:
            parsed = [parse_example_text(doc.text, fallback_name=doc.name) for doc in body.examples]
            existing = list(session.known_uses) if body.append else []
            return engine.ingest_examples(session, existing + parsed)

        return session_payload(mutate(session_id, apply))

    @app.get("/sessions/{session_id}/steps")
    def step_timeline(session_id: str) -> dict[str, Any]:
        require(session_id)
        return {"steps": _timeline(store.load(session_id))}

    @app.post("/sessions/{session_id}/steps/{step}/run")
    def run_step(session_id: str, step: str) -> dict[str, Any]:
        step_id = _parse_step(step)
        session = mutate(session_id, lambda s: engine.run_step(s, step_id))
        return session_payload(session) | {"step": _timeline(session)[STEP_ORDER.index(step_id)]}

    @app.post("/sessions/{session_id}/steps/{step}/approve")
    def approve_step(session_id: str, step: str) -> dict[str, Any]:
        step_id = _parse_step(step)
        return session_payload(mutate(session_id, lambda s: engine.approve_step(s, step_id)))

    @app.post("/sessions/{session_id}/steps/{step}/rerun")
    def rerun_step(session_id: str, step: str) -> dict[str, Any]:
        step_id = _parse_step(step)
        session = mutate(session_id, lambda s: engine.rerun_step(s, step_id))
        return session_payload(session) | {"step": _timeline(session)[STEP_ORDER.index(step_id)]}

    # ------------------------------------------------------------ curation

    @app.patch("/sessions/{session_id}/patterns/{name}")
    def patch_pattern(session_id: str, name: str, body: EditBody) -> dict[str, Any]:
        actor = Origin.HUMAN if body.actor == "human" else Origin.AI
        return session_payload(
            mutate(session_id, lambda s: edit_field(s, name, body.field, body.text, actor, body.model_id))
        )

    @app.post("/sessions/{session_id}/patterns/{name}/rename")
    def rename(session_id: str, name: str, body: RenameBody) -> dict[str, Any]:
        return session_payload(mutate(session_id, lambda s: rename_pattern(s, name, body.new_name, body.reason)))

    @app.post("/sessions/{session_id}/patterns/{name}/drop")
    def drop(session_id: str, name: str, body: DropBody | None = None) -> dict[str, Any]:
        reason = body.reason if body else ""
        return session_payload(mutate(session_id, lambda s: drop_pattern(s, name, reason)))

    @app.post("/sessions/{session_id}/patterns/{name}/expand")
    def expand(session_id: str, name: str) -> dict[str, Any]:
        expanded: dict[str, str] = {}

        def apply(session: Session) -> Session:
            session, text = engine.expand_pattern(session, name)
            expanded["text"] = text
            return session

        session = mutate(session_id, apply)
        return session_payload(session) | {"text": expanded["text"]}

    # ------------------------------------------------------------ artifacts

    @app.get("/sessions/{session_id}/matrix")
    def get_matrix(session_id: str) -> dict[str, Any]:
        require(session_id)
        enc = encode_session(store.load(session_id))
        return {"matrix": enc["matrix"], "registry": enc["registry"]}

    @app.get("/sessions/{session_id}/stories")
    def get_stories(session_id: str) -> dict[str, Any]:
        require(session_id)
        return {"stories": encode_session(store.load(session_id))["stories"]}

    @app.post("/sessions/{session_id}/stories")
    def post_story(session_id: str, body: StoryBody) -> dict[str, Any]:
        return session_payload(mutate(session_id, lambda s: engine.generate_story(s, body.known_use_id)))

    @app.post("/sessions/{session_id}/missing-check")
    def missing_check(session_id: str) -> dict[str, Any]:
        found: dict[str, Any] = {}

        def apply(session: Session) -> Session:
            session, suggestions, _diags = engine.run_missing_pattern_check(session)
            found["suggestions"] = list(suggestions)
            return session

        session = mutate(session_id, apply)
        return session_payload(session) | {"suggestions": found["suggestions"]}

    @app.post("/sessions/{session_id}/summarize")
    def summarize(session_id: str) -> dict[str, Any]:
        found: dict[str, str] = {}

        def apply(session: Session) -> Session:
            session, text = engine.summarize_process(session)
            found["summary"] = text
            return session

        session = mutate(session_id, apply)
        return session_payload(session) | {"summary": found["summary"]}

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str) -> dict[str, Any]:
        require(session_id)
        return {"transcript": encode_session(store.load(session_id))["transcript"]}

    @app.get("/sessions/{session_id}/validate")
    def validate(session_id: str) -> dict[str, Any]:
        require(session_id)
        report = validate_language(store.load(session_id))
        return {
            "ok": report.ok,
            "issues": [
                {"severity": issue.severity, "message": issue.message, "pattern": issue.pattern}
                for issue in report.issues
            ],
        }

    # ------------------------------------------------------------ rendering

    @app.get("/sessions/{session_id}/render/{kind}")
    def render(session_id: str, kind: str, name: str | None = None, known_use: str | None = None) -> dict[str, Any]:
        require(session_id)
        session = store.load(session_id)
        try:
            doc_kind = DocumentKind(kind.strip().lower())
        except ValueError:
            raise HTTPException(status_code=404, detail=f"unknown document kind {kind!r}") from None
        if doc_kind in (DocumentKind.PATTERN, DocumentKind.SHORTFORM):
            if not name:
                raise HTTPException(status_code=422, detail="this document kind needs a ?name= query")
            pattern = _find_pattern(session, name)
            doc = render_pattern_alexandrian(pattern) if doc_kind == DocumentKind.PATTERN else render_shortform(pattern)
        elif doc_kind == DocumentKind.LANGUAGE:
            doc = render_language(session)
        elif doc_kind == DocumentKind.MATRIX:
            doc = render_matrix(session.matrix, session.registry)
        elif doc_kind == DocumentKind.STORY:
            if not known_use:
                raise HTTPException(status_code=422, detail="story rendering needs a ?known_use= query")
            story = next((s for s in session.stories if s.known_use_id == known_use), None)
            if story is None:
                raise errors.UnknownKnownUse(f"no story recorded for known use {known_use!r}")
            doc = render_story(story, session.known_uses)
        else:
            doc = export_log(session.transcript)
        return {"kind": doc.kind.value, "body": doc.body}

    return app


def _find_pattern(session: Session, name: str):
    pattern = find_by_name(live_patterns(session.patterns), name)
    if pattern is None:
        raise errors.UnknownPattern(f"no live pattern named {name!r}")
    return pattern
