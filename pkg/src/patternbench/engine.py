"""Session state and the engine that drives the eight-step mining pipeline.

A Session is an immutable snapshot: every operation returns a new one, so a
failed call leaves the caller's session untouched. Step order is enforced by
requiring every prior step to be approved before a step runs; rerunning an
earlier step marks every later step that had already run as stale.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import errors, parsing
from .gateway import ChatClient, Transcript
from .model import (
    Affordance,
    CandidateSolution,
    Clock,
    CrossReferenceMatrix,
    KnownUse,
    Origin,
    PatternDraft,
    PatternStatus,
    PatternStory,
    ProblemStatement,
    Provenance,
    RenameMap,
    ResultingContextEdge,
    STEP_ORDER,
    StepId,
    StepStatus,
    empty_matrix,
    find_by_name,
    live_patterns,
    step_index,
    uniform_provenance,
    utc_now,
)
from .parsing import ERROR, WARNING, ParseDiagnostic, resolve_known_use_mentions
from .prompts import render_prompt, render_reflection_prompt
from .render import render_shortform


@dataclass(frozen=True)
class AuditEvent:
    """One entry in the session's append-only change log."""

    at: str
    actor: str  # ai | human | system
    action: str
    detail: str = ""


def initial_step_status() -> dict[StepId, StepStatus]:
    return {step: StepStatus.PENDING for step in STEP_ORDER}


@dataclass(frozen=True)
class Session:
    """Everything one mining run has produced so far."""

    id: str
    created_at: str = ""
    known_uses: tuple[KnownUse, ...] = ()
    solutions: tuple[CandidateSolution, ...] = ()
    problems: tuple[ProblemStatement, ...] = ()
    patterns: tuple[PatternDraft, ...] = ()
    registry: tuple[Affordance, ...] = ()
    matrix: CrossReferenceMatrix = field(default_factory=empty_matrix)
    stories: tuple[PatternStory, ...] = ()
    rename_map: RenameMap = field(default_factory=RenameMap)
    transcript: Transcript = field(default_factory=Transcript)
    step_status: dict[StepId, StepStatus] = field(default_factory=initial_step_status)
    step_diagnostics: dict[StepId, tuple[ParseDiagnostic, ...]] = field(default_factory=dict)
    missing_suggestions: tuple[str, ...] = ()
    process_summary: str = ""
    audit_log: tuple[AuditEvent, ...] = ()

    def status_of(self, step: StepId) -> StepStatus:
        return self.step_status.get(step, StepStatus.PENDING)

    @property
    def cursor(self) -> StepId | None:
        """The first step that is not yet approved; None when all are."""
        for step in STEP_ORDER:
            if self.status_of(step) != StepStatus.APPROVED:
                return step
        return None

    @property
    def complete(self) -> bool:
        return self.cursor is None

    def with_status(self, step: StepId, status: StepStatus) -> "Session":
        statuses = dict(self.step_status)
        statuses[step] = status
        return replace(self, step_status=statuses)

    def with_diagnostics(
        self, step: StepId, diagnostics: Sequence[ParseDiagnostic], append: bool = False
    ) -> "Session":
        merged = dict(self.step_diagnostics)
        if append:
            merged[step] = merged.get(step, ()) + tuple(diagnostics)
        else:
            merged[step] = tuple(diagnostics)
        return replace(self, step_diagnostics=merged)

    def logged(self, actor: str, action: str, detail: str = "", at: str | None = None) -> "Session":
        event = AuditEvent(at or utc_now(), actor, action, detail)
        return replace(self, audit_log=self.audit_log + (event,))


def _invalidate_after(session: Session, step: StepId) -> Session:
    """Mark every later step that has already run as stale."""
    statuses = dict(session.step_status)
    for later in STEP_ORDER[step_index(step) + 1 :]:
        if statuses.get(later, StepStatus.PENDING) != StepStatus.PENDING:
            statuses[later] = StepStatus.STALE
    return replace(session, step_status=statuses)


@dataclass
class MiningEngine:
    """Runs pipeline steps against a chat client and folds results into sessions."""

    client: ChatClient
    clock: Clock = utc_now

    # ------------------------------------------------------------- lifecycle

    def new_session(self, session_id: str | None = None) -> Session:
        transcript = Transcript(model_id=self.client.model_id or "")
        return Session(id=session_id or uuid.uuid4().hex[:12], created_at=self.clock(), transcript=transcript)

    def ingest_examples(self, session: Session, known_uses: Sequence[KnownUse]) -> Session:
        """Step 1: accept the example set, replacing any previous one."""
        if not known_uses:
            raise errors.EmptyExampleSet("at least one example narrative is required")
        seen: set[str] = set()
        for ku in known_uses:
            if ku.id in seen:
                raise errors.DuplicateName(f"duplicate known-use id {ku.id!r}")
            seen.add(ku.id)
        diagnostics: list[ParseDiagnostic] = []
        if len(known_uses) == 1:
            diagnostics.append(
                ParseDiagnostic(
                    WARNING,
                    "only one example ingested; more examples may be required to ground recurring solutions",
                )
            )
        session = replace(session, known_uses=tuple(known_uses))
        session = _invalidate_after(session, StepId.IDENTIFY_EXAMPLES)
        session = session.with_status(StepId.IDENTIFY_EXAMPLES, StepStatus.AWAITING_REVIEW)
        session = session.with_diagnostics(StepId.IDENTIFY_EXAMPLES, diagnostics)
        return session.logged(
            "human", "ingest_examples", ", ".join(ku.id for ku in known_uses), at=self.clock()
        )

    # ------------------------------------------------------------ step gates

    def _require_priors_approved(self, session: Session, step: StepId) -> None:
        for prior in STEP_ORDER[: step_index(step)]:
            if session.status_of(prior) != StepStatus.APPROVED:
                raise errors.OutOfOrder(
                    f"cannot touch {step.value} while {prior.value} is {session.status_of(prior).value}"
                )

    def run_step(self, session: Session, step: StepId) -> Session:
        """Run a pending (or stale) step; the result awaits human review."""
        if step == StepId.IDENTIFY_EXAMPLES:
            raise errors.OutOfOrder("identify_examples is driven by ingesting examples, not by running")
        status = session.status_of(step)
        if status not in (StepStatus.PENDING, StepStatus.STALE):
            raise errors.OutOfOrder(f"step {step.value} is {status.value}; approve or rerun it instead")
        self._require_priors_approved(session, step)
        session, diagnostics = self._dispatch(session, step)
        session = session.with_status(step, StepStatus.AWAITING_REVIEW)
        session = session.with_diagnostics(step, diagnostics)
        return session.logged("ai", "run_step", step.value, at=self.clock())

    def approve_step(self, session: Session, step: StepId) -> Session:
        if session.status_of(step) != StepStatus.AWAITING_REVIEW:
            raise errors.NotAwaitingReview(
                f"step {step.value} is {session.status_of(step).value}, not awaiting review"
            )
        session = session.with_status(step, StepStatus.APPROVED)
        return session.logged("human", "approve_step", step.value, at=self.clock())

    def rerun_step(self, session: Session, step: StepId) -> Session:
        """Rerun an already-run step, invalidating everything after it."""
        if step == StepId.IDENTIFY_EXAMPLES:
            if not session.known_uses:
                raise errors.EmptyExampleSet("no examples to re-ingest")
            return self.ingest_examples(session, session.known_uses)
        if session.status_of(step) == StepStatus.PENDING:
            raise errors.NeverRun(f"step {step.value} has never run; nothing to rerun")
        self._require_priors_approved(session, step)
        session, diagnostics = self._dispatch(session, step)
        session = _invalidate_after(session, step)
        session = session.with_status(step, StepStatus.AWAITING_REVIEW)
        session = session.with_diagnostics(step, diagnostics)
        return session.logged("ai", "rerun_step", step.value, at=self.clock())

    # -------------------------------------------------------------- dispatch

    def _exchange(self, session: Session, prompt: str, step_tag: StepId | None) -> tuple[Session, str]:
        transcript, reply = self.client.complete(session.transcript, prompt, step_tag)
        return replace(session, transcript=transcript), reply.content

    def _ai_provenance(self) -> Provenance:
        return Provenance(Origin.AI, self.client.model_id, self.clock())

    def _dispatch(self, session: Session, step: StepId) -> tuple[Session, list[ParseDiagnostic]]:
        runner = {
            StepId.EXTRACT_SOLUTIONS: self._run_extract_solutions,
            StepId.DEFINE_PROBLEMS: self._run_define_problems,
            StepId.DISTILL_PATTERNS: self._run_distill_patterns,
            StepId.IDENTIFY_AFFORDANCES: self._run_identify_affordances,
            StepId.RELATE_AFFORDANCES: self._run_relate_affordances,
            StepId.REFINE: self._run_refine,
            StepId.CONSOLIDATE: self._run_consolidate,
        }.get(step)
        if runner is None:
            raise errors.UnknownStep(f"step {step!r} cannot be dispatched")
        return runner(session)

    def _run_extract_solutions(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        intro = render_prompt(StepId.IDENTIFY_EXAMPLES, session)
        question = render_prompt(StepId.EXTRACT_SOLUTIONS, session)
        session, text = self._exchange(session, intro + "\n\n" + question, StepId.EXTRACT_SOLUTIONS)
        try:
            solutions, diagnostics = parsing.parse_solutions(text)
        except errors.ParseEmpty as exc:
            return session, [ParseDiagnostic(ERROR, str(exc))]
        stamp = self._ai_provenance()
        solutions = [replace(s, provenance=stamp) for s in solutions]
        return replace(session, solutions=tuple(solutions)), diagnostics

    def _run_define_problems(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        prompt = render_prompt(StepId.DEFINE_PROBLEMS, session)
        session, text = self._exchange(session, prompt, StepId.DEFINE_PROBLEMS)
        try:
            problems, diagnostics = parsing.parse_problems(text, session.solutions)
        except errors.ParseEmpty as exc:
            return session, [ParseDiagnostic(ERROR, str(exc))]
        stamp = self._ai_provenance()
        problems = [replace(p, provenance=stamp) for p in problems]
        return replace(session, problems=tuple(problems)), diagnostics

    def _run_distill_patterns(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        prompt = render_prompt(StepId.DISTILL_PATTERNS, session)
        session, text = self._exchange(session, prompt, StepId.DISTILL_PATTERNS)
        try:
            drafts, diagnostics = parsing.parse_pattern_shortforms(text)
        except errors.ParseEmpty as exc:
            return session, [ParseDiagnostic(ERROR, str(exc))]
        stamp = self._ai_provenance()
        resolved: list[PatternDraft] = []
        for draft in drafts:
            refs = []
            for ref in draft.known_uses:
                mentioned = resolve_known_use_mentions(ref.note, session.known_uses)
                if not mentioned:
                    diagnostics.append(
                        ParseDiagnostic(
                            ERROR,
                            f"known-use note on {draft.name!r} matches no ingested example: {ref.note!r}",
                        )
                    )
                    continue
                refs.extend(replace(ref, known_use_id=ku.id) for ku in mentioned)
            if not refs:
                diagnostics.append(
                    ParseDiagnostic(ERROR, f"pattern {draft.name!r} has no resolvable known use")
                )
            resolved.append(
                replace(draft, known_uses=tuple(refs), provenance=uniform_provenance(stamp))
            )
        return replace(session, patterns=tuple(resolved)), diagnostics

    def _run_identify_affordances(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        prompt = render_prompt(StepId.IDENTIFY_AFFORDANCES, session)
        session, text = self._exchange(session, prompt, StepId.IDENTIFY_AFFORDANCES)
        try:
            registry, diagnostics = parsing.parse_affordances(text)
        except errors.ParseEmpty as exc:
            return session, [ParseDiagnostic(ERROR, str(exc))]
        return replace(session, registry=tuple(registry)), diagnostics

    def _run_relate_affordances(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        prompt = render_prompt(StepId.RELATE_AFFORDANCES, session)
        session, text = self._exchange(session, prompt, StepId.RELATE_AFFORDANCES)
        try:
            matrix, diagnostics = parsing.parse_cross_references(text, session.registry, session.patterns)
        except errors.ParseEmpty as exc:
            return session, [ParseDiagnostic(ERROR, str(exc))]
        patterns = tuple(
            replace(
                p,
                affordance_refs=tuple(a.id for a in session.registry if matrix.cell(a.id, p.name)),
            )
            if p.live
            else p
            for p in session.patterns
        )
        return replace(session, matrix=matrix, patterns=patterns), diagnostics

    def _run_refine(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        """Three exchanges: recap the list, probe for gaps, then wire dependencies."""
        diagnostics: list[ParseDiagnostic] = []

        recap_prompt = render_prompt(StepId.REFINE, session, part="recap")
        session, recap = self._exchange(session, recap_prompt, StepId.REFINE)
        lowered = recap.casefold()
        for pattern in live_patterns(session.patterns):
            if pattern.name.casefold() not in lowered:
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"recap does not mention pattern {pattern.name!r}")
                )

        missing_prompt = render_prompt(StepId.REFINE, session, part="missing")
        session, missing_text = self._exchange(session, missing_prompt, StepId.REFINE)
        suggestions, missing_diags = parsing.parse_missing_suggestions(
            missing_text, session.patterns, session.rename_map
        )
        diagnostics.extend(missing_diags)

        deps_prompt = render_prompt(StepId.REFINE, session, part="dependencies")
        session, deps_text = self._exchange(session, deps_prompt, StepId.REFINE)
        blocks, deps_diags = parsing.parse_resulting_contexts(
            deps_text, session.patterns, session.rename_map
        )
        diagnostics.extend(deps_diags)

        stamp = self._ai_provenance()
        patterns: list[PatternDraft] = []
        for pattern in session.patterns:
            if not pattern.live:
                patterns.append(pattern)
                continue
            mine = [b for b in blocks if b.source == pattern.name]
            if not mine:
                diagnostics.append(
                    ParseDiagnostic(WARNING, f"no resulting context returned for {pattern.name!r}")
                )
                updated = pattern
            elif all(b.target is None for b in mine):
                updated = replace(pattern, resulting_context=(), resulting_context_none=True)
            else:
                edges = tuple(
                    ResultingContextEdge(b.target, b.rationale) for b in mine if b.target is not None
                )
                updated = replace(pattern, resulting_context=edges, resulting_context_none=False)
            updated = replace(updated, status=PatternStatus.REFINED)
            updated = updated.with_provenance("resulting_context", stamp)
            patterns.append(updated)
        session = replace(
            session, patterns=tuple(patterns), missing_suggestions=tuple(suggestions)
        )
        return session, diagnostics

    def _run_consolidate(self, session: Session) -> tuple[Session, list[ParseDiagnostic]]:
        """No model call: promote the refined drafts to consolidated patterns."""
        patterns = tuple(
            replace(p, status=PatternStatus.CONSOLIDATED) if p.live else p for p in session.patterns
        )
        return replace(session, patterns=patterns), []

    # ------------------------------------------------------- on-demand calls

    def run_missing_pattern_check(self, session: Session) -> tuple[Session, tuple[str, ...], list[ParseDiagnostic]]:
        """Ask whether any pattern is missing; suggestions are never auto-inserted."""
        if session.status_of(StepId.DISTILL_PATTERNS) != StepStatus.APPROVED:
            raise errors.OutOfOrder("missing-pattern check needs distill_patterns approved")
        prompt = render_prompt(StepId.REFINE, session, part="missing")
        session, text = self._exchange(session, prompt, StepId.REFINE)
        suggestions, diagnostics = parsing.parse_missing_suggestions(
            text, session.patterns, session.rename_map
        )
        session = replace(session, missing_suggestions=tuple(suggestions))
        session = session.logged("ai", "missing_pattern_check", ", ".join(suggestions), at=self.clock())
        return session, tuple(suggestions), diagnostics

    def _require_consolidate_active(self, session: Session, action: str) -> None:
        status = session.status_of(StepId.CONSOLIDATE)
        if status not in (StepStatus.AWAITING_REVIEW, StepStatus.APPROVED):
            raise errors.OutOfOrder(f"{action} is available once consolidate has run (now {status.value})")

    def generate_story(self, session: Session, known_use_id: str) -> Session:
        """Walk one known use through the patterns it applies."""
        self._require_consolidate_active(session, "story generation")
        known_use = next((ku for ku in session.known_uses if ku.id == known_use_id), None)
        if known_use is None:
            raise errors.UnknownKnownUse(f"no known use with id {known_use_id!r}")
        prompt = render_prompt(StepId.CONSOLIDATE, session, part="story", known_use=known_use)
        session, text = self._exchange(
            session, prompt + "\n" + known_use.narrative, StepId.CONSOLIDATE
        )
        try:
            story, diagnostics = parsing.parse_pattern_story(
                text, known_use.id, session.patterns, session.rename_map
            )
        except errors.ParseEmpty as exc:
            return session.with_diagnostics(
                StepId.CONSOLIDATE, [ParseDiagnostic(ERROR, str(exc))], append=True
            )
        stories = tuple(s for s in session.stories if s.known_use_id != known_use.id) + (story,)
        session = replace(session, stories=stories)
        session = session.with_diagnostics(StepId.CONSOLIDATE, diagnostics, append=True)
        return session.logged("ai", "generate_story", known_use.id, at=self.clock())

    def expand_pattern(self, session: Session, pattern_name: str) -> tuple[Session, str]:
        """Ask for a longform expansion of one pattern; the text is returned, not merged."""
        self._require_consolidate_active(session, "pattern expansion")
        pattern = find_by_name(live_patterns(session.patterns), pattern_name)
        if pattern is None:
            raise errors.UnknownPattern(f"no live pattern named {pattern_name!r}")
        prompt = render_prompt(StepId.CONSOLIDATE, session, part="expand", pattern=pattern)
        shortform = render_shortform(pattern)
        session, text = self._exchange(session, prompt + "\n\n" + shortform.body, StepId.CONSOLIDATE)
        session = session.logged("ai", "expand_pattern", pattern.name, at=self.clock())
        return session, text

    def summarize_process(self, session: Session) -> tuple[Session, str]:
        """Ask the assistant to recount the co-creation process."""
        if not session.transcript.messages:
            raise errors.EmptyTranscript("nothing has been discussed yet")
        session, text = self._exchange(session, render_reflection_prompt(), None)
        session = replace(session, process_summary=text)
        return session.logged("ai", "summarize_process", at=self.clock()), text
