"""Session persistence: one JSON file per session, written atomically.

Writes go to a temp file in the same directory, are fsynced, then renamed
over the target, so a crash mid-save leaves the previous file intact. A
per-session file lock serializes concurrent writers. Loading verifies the
schema version and the session's referential integrity before returning.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path
from typing import Any, Callable

from filelock import FileLock

from . import errors
from .curation import validate_language
from .engine import AuditEvent, Session
from .gateway import ChatMessage, GenerationParams, Transcript
from .model import (
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
    StepId,
    StepStatus,
    StoryEntry,
)
from .parsing import ParseDiagnostic

SCHEMA_VERSION = 1

_SAFE_ID_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")


# ------------------------------------------------------------------ encoding


def _encode_provenance(prov: Provenance) -> dict[str, Any]:
    return {"origin": prov.origin.value, "model_id": prov.model_id, "edited_at": prov.edited_at}


def _encode_pattern(pattern: PatternDraft) -> dict[str, Any]:
    return {
        "name": pattern.name,
        "context": pattern.context,
        "problem": pattern.problem,
        "forces": pattern.forces,
        "solution_statement": pattern.solution_statement,
        "solution_detail": pattern.solution_detail,
        "known_uses": [{"known_use_id": r.known_use_id, "note": r.note} for r in pattern.known_uses],
        "resulting_context": [
            {"target": e.target, "rationale": e.rationale} for e in pattern.resulting_context
        ],
        "resulting_context_none": pattern.resulting_context_none,
        "affordance_refs": list(pattern.affordance_refs),
        "status": pattern.status.value,
        "provenance": {name: _encode_provenance(p) for name, p in pattern.provenance.items()},
    }


def _encode_diagnostic(diag: ParseDiagnostic) -> dict[str, Any]:
    return {"severity": diag.severity, "message": diag.message, "line": diag.line, "end_line": diag.end_line}


def encode_session(session: Session) -> dict[str, Any]:
    return {
        "id": session.id,
        "created_at": session.created_at,
        "known_uses": [
            {"id": ku.id, "name": ku.name, "narrative": ku.narrative} for ku in session.known_uses
        ],
        "solutions": [
            {"name": s.name, "description": s.description, "provenance": _encode_provenance(s.provenance)}
            for s in session.solutions
        ],
        "problems": [
            {"solution_name": p.solution_name, "text": p.text, "provenance": _encode_provenance(p.provenance)}
            for p in session.problems
        ],
        "patterns": [_encode_pattern(p) for p in session.patterns],
        "registry": [
            {"id": a.id, "component": a.component.value, "name": a.name, "description": a.description}
            for a in session.registry
        ],
        "matrix": {
            "rows": list(session.matrix.rows),
            "cols": list(session.matrix.cols),
            "cells": [list(row) for row in session.matrix.cells],
            "notes": [
                {"affordance_id": aff, "pattern": pat, "note": note}
                for (aff, pat), note in sorted(session.matrix.notes.items())
            ],
        },
        "stories": [
            {
                "known_use_id": story.known_use_id,
                "entries": [
                    {"pattern_name": e.pattern_name, "narrative": e.narrative} for e in story.entries
                ],
            }
            for story in session.stories
        ],
        "rename_map": [
            {"old_name": e.old_name, "new_name": e.new_name, "reason": e.reason, "renamed_at": e.renamed_at}
            for e in session.rename_map.entries
        ],
        "transcript": {
            "model_id": session.transcript.model_id,
            "params": {
                "temperature": session.transcript.params.temperature,
                "max_output_tokens": session.transcript.params.max_output_tokens,
            },
            "messages": [
                {
                    "role": m.role,
                    "content": m.content,
                    "step_tag": m.step_tag.value if m.step_tag else None,
                    "timestamp": m.timestamp,
                }
                for m in session.transcript.messages
            ],
        },
        "step_status": {step.value: status.value for step, status in session.step_status.items()},
        "step_diagnostics": {
            step.value: [_encode_diagnostic(d) for d in diags]
            for step, diags in session.step_diagnostics.items()
        },
        "missing_suggestions": list(session.missing_suggestions),
        "process_summary": session.process_summary,
        "audit_log": [
            {"at": e.at, "actor": e.actor, "action": e.action, "detail": e.detail}
            for e in session.audit_log
        ],
    }


# ------------------------------------------------------------------ decoding


def _decode_provenance(raw: dict[str, Any]) -> Provenance:
    return Provenance(Origin(raw["origin"]), raw.get("model_id"), raw.get("edited_at", ""))


def _decode_pattern(raw: dict[str, Any]) -> PatternDraft:
    return PatternDraft(
        name=raw["name"],
        context=raw.get("context", ""),
        problem=raw.get("problem", ""),
        forces=raw.get("forces", ""),
        solution_statement=raw.get("solution_statement", ""),
        solution_detail=raw.get("solution_detail", ""),
        known_uses=tuple(
            KnownUseRef(r.get("known_use_id"), r.get("note", "")) for r in raw.get("known_uses", [])
        ),
        resulting_context=tuple(
            ResultingContextEdge(e["target"], e.get("rationale", ""))
            for e in raw.get("resulting_context", [])
        ),
        resulting_context_none=raw.get("resulting_context_none", False),
        affordance_refs=tuple(raw.get("affordance_refs", [])),
        status=PatternStatus(raw["status"]),
        provenance={name: _decode_provenance(p) for name, p in raw.get("provenance", {}).items()},
    )


def decode_session(raw: dict[str, Any]) -> Session:
    matrix_raw = raw.get("matrix", {})
    transcript_raw = raw.get("transcript", {})
    params_raw = transcript_raw.get("params", {})
    return Session(
        id=raw["id"],
        created_at=raw.get("created_at", ""),
        known_uses=tuple(
            KnownUse(k["id"], k["name"], k.get("narrative", "")) for k in raw.get("known_uses", [])
        ),
        solutions=tuple(
            CandidateSolution(s["name"], s.get("description", ""), _decode_provenance(s["provenance"]))
            for s in raw.get("solutions", [])
        ),
        problems=tuple(
            ProblemStatement(p.get("solution_name"), p["text"], _decode_provenance(p["provenance"]))
            for p in raw.get("problems", [])
        ),
        patterns=tuple(_decode_pattern(p) for p in raw.get("patterns", [])),
        registry=tuple(
            Affordance(a["id"], Component(a["component"]), a["name"], a.get("description", ""))
            for a in raw.get("registry", [])
        ),
        matrix=CrossReferenceMatrix(
            rows=tuple(matrix_raw.get("rows", [])),
            cols=tuple(matrix_raw.get("cols", [])),
            cells=tuple(tuple(bool(v) for v in row) for row in matrix_raw.get("cells", [])),
            notes={
                (n["affordance_id"], n["pattern"]): n["note"] for n in matrix_raw.get("notes", [])
            },
        ),
        stories=tuple(
            PatternStory(
                s["known_use_id"],
                tuple(StoryEntry(e["pattern_name"], e.get("narrative", "")) for e in s.get("entries", [])),
            )
            for s in raw.get("stories", [])
        ),
        rename_map=RenameMap(
            tuple(
                RenameEntry(e["old_name"], e["new_name"], e.get("reason", ""), e.get("renamed_at", ""))
                for e in raw.get("rename_map", [])
            )
        ),
        transcript=Transcript(
            messages=tuple(
                ChatMessage(
                    m["role"],
                    m["content"],
                    StepId(m["step_tag"]) if m.get("step_tag") else None,
                    m.get("timestamp", ""),
                )
                for m in transcript_raw.get("messages", [])
            ),
            model_id=transcript_raw.get("model_id", ""),
            params=GenerationParams(
                temperature=params_raw.get("temperature", 0.0),
                max_output_tokens=params_raw.get("max_output_tokens", 2048),
            ),
        ),
        step_status={
            StepId(step): StepStatus(status) for step, status in raw.get("step_status", {}).items()
        },
        step_diagnostics={
            StepId(step): tuple(
                ParseDiagnostic(d["severity"], d["message"], d.get("line"), d.get("end_line"))
                for d in diags
            )
            for step, diags in raw.get("step_diagnostics", {}).items()
        },
        missing_suggestions=tuple(raw.get("missing_suggestions", [])),
        process_summary=raw.get("process_summary", ""),
        audit_log=tuple(
            AuditEvent(e.get("at", ""), e["actor"], e["action"], e.get("detail", ""))
            for e in raw.get("audit_log", [])
        ),
    )


# --------------------------------------------------------------------- store


class SessionStore:
    """Saves and loads sessions as JSON files under one data directory."""

    def __init__(self, data_dir: str | Path) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _check_id(self, session_id: str) -> str:
        if not _SAFE_ID_RE.fullmatch(session_id):
            raise errors.IoError(f"unsafe session id {session_id!r}")
        return session_id

    def path_for(self, session_id: str) -> Path:
        return self.data_dir / f"{self._check_id(session_id)}.json"

    def lock_for(self, session_id: str) -> FileLock:
        return FileLock(str(self.data_dir / f"{self._check_id(session_id)}.lock"), timeout=30)

    def exists(self, session_id: str) -> bool:
        return _SAFE_ID_RE.fullmatch(session_id) is not None and self.path_for(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(path.stem for path in self.data_dir.glob("*.json"))

    def _write(self, session: Session) -> Path:
        target = self.path_for(session.id)
        payload = {"schema_version": SCHEMA_VERSION, "session": encode_session(session)}
        text = json.dumps(payload, ensure_ascii=False, indent=2)
        tmp = target.with_name(f".{target.name}.tmp-{os.getpid()}")
        try:
            with open(tmp, "w", encoding="utf-8") as handle:
                handle.write(text)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, target)
        except OSError as exc:
            tmp.unlink(missing_ok=True)
            raise errors.IoError(f"cannot save session {session.id!r}: {exc}") from exc
        return target

    def save(self, session: Session) -> Path:
        """Write the session atomically; returns the file path."""
        try:
            with self.lock_for(session.id):
                return self._write(session)
        except TimeoutError as exc:
            raise errors.IoError(f"session {session.id!r} is locked by another writer") from exc

    def load(self, session_id: str) -> Session:
        """Read, decode, and integrity-check one session."""
        path = self.path_for(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise errors.IoError(f"cannot read session {session_id!r}: {exc}") from exc
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise errors.IoError(f"session file {path.name} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or "schema_version" not in payload:
            raise errors.SchemaMismatch(f"session file {path.name} lacks a schema_version")
        if payload["schema_version"] != SCHEMA_VERSION:
            raise errors.SchemaMismatch(
                f"session file {path.name} has schema_version {payload['schema_version']!r}; "
                f"expected {SCHEMA_VERSION}"
            )
        try:
            session = decode_session(payload["session"])
        except (KeyError, TypeError, ValueError) as exc:
            raise errors.IoError(f"session file {path.name} is corrupt: {exc!r}") from exc
        report = validate_language(session)
        broken = [issue for issue in report.issues if issue.severity == "error"]
        if broken:
            raise errors.InvariantViolation(
                f"session {session_id!r} violates integrity: {broken[0].message}"
            )
        return session

    def mutate(self, session_id: str, fn: Callable[[Session], Session]) -> Session:
        """Load, transform, and save one session under its lock."""
        try:
            with self.lock_for(session_id):
                session = self.load(session_id)
                updated = fn(session)
                self._write(updated)
                return updated
        except TimeoutError as exc:
            raise errors.IoError(f"session {session_id!r} is locked by another writer") from exc
