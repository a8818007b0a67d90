"""Exception types shared across the workbench.

Every domain error derives from :class:`WorkbenchError` so callers (CLI,
HTTP service) can map the whole family to exit codes / status codes in one
place.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- model


class UnknownPattern(WorkbenchError):
    """A pattern name did not resolve against the session."""


class UnknownKnownUse(WorkbenchError):
    """A known-use id did not resolve against the session."""


class DuplicateName(WorkbenchError):
    """A rename would collide with another live pattern name."""


class UnknownField(WorkbenchError):
    """edit targeted a field that is not editable."""


class InvariantViolation(WorkbenchError):
    """A structural invariant of the session no longer holds."""


# ---------------------------------------------------------------- pipeline


class OutOfOrder(WorkbenchError):
    """A step was run before every earlier step was approved."""


class NotAwaitingReview(WorkbenchError):
    """approve targeted a step that is not awaiting review."""


class NeverRun(WorkbenchError):
    """rerun targeted a step that has never been run."""


class EmptyExampleSet(WorkbenchError):
    """Example ingestion received no usable narratives."""


class MalformedExample(WorkbenchError):
    """An example file is missing a name or a narrative body."""


class UnknownStep(WorkbenchError):
    """A step id did not match any pipeline step."""


class MissingInput(WorkbenchError):
    """A prompt required an upstream artifact that is absent or stale."""

    def __init__(self, step: str, placeholder: str):
        super().__init__(f"step {step!r} requires {placeholder!r} which is missing or stale")
        self.step = step
        self.placeholder = placeholder


# ---------------------------------------------------------------- gateway


class ProviderError(WorkbenchError):
    """The live provider failed after retries."""


class EmptyPrompt(WorkbenchError):
    """A completion was requested with an empty user message."""


class EmptyTranscript(WorkbenchError):
    """An export was requested for a transcript with no messages."""


class ReplayMiss(WorkbenchError):
    """Replay had no recorded response for a prompt."""

    def __init__(self, step: str | None, digest: str):
        super().__init__(f"no recorded response for step {step!r} (prompt digest {digest[:12]}…)")
        self.step = step
        self.digest = digest


# ---------------------------------------------------------------- parsing


class ParseEmpty(WorkbenchError):
    """Base class for parsers that found nothing usable in a response."""


class NoSolutionsFound(ParseEmpty):
    pass


class NoProblemsFound(ParseEmpty):
    pass


class NoPatternsFound(ParseEmpty):
    pass


class NoAffordancesFound(ParseEmpty):
    pass


class EmptyMatrix(ParseEmpty):
    pass


class NoStoryEntries(ParseEmpty):
    pass


# ---------------------------------------------------------------- rendering


class IncompletePattern(WorkbenchError):
    """A pattern lacks the fields required by the document format."""


class NoConsolidatedPatterns(WorkbenchError):
    """Language rendering found no consolidated live pattern."""


# ---------------------------------------------------------------- persistence


class IoError(WorkbenchError):
    """A storage read or write failed."""


class SchemaMismatch(WorkbenchError):
    """A session file declares an unsupported schema version."""
