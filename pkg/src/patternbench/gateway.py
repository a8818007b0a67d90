"""Chat gateway: transcript types, live provider client, replay fixtures.

Replay is the default mode. A fixture file stores verbatim prompt/response
pairs; lookup keys are (step tag, prompt digest) where the digest is taken
over a normalized prompt so editor-introduced trailing whitespace or line
ending changes never invalidate a fixture.

Fixture file format (line oriented, markers start with ``#%``)::

    #% fixture chat-replay v1

    #% step: extract_solutions
    #% prompt
    <verbatim prompt text>
    #% response
    <verbatim response text>

A ``#% digest: <hex>`` line may replace the prompt block when only the
digest is known.
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from . import errors
from .model import Clock, StepId, utc_now

log = logging.getLogger(__name__)

FIXTURE_HEADER = "#% fixture chat-replay v1"


def normalize_prompt(text: str) -> str:
    """Canonical prompt form: LF endings, no trailing whitespace, no trailing newlines."""
    lines = [line.rstrip() for line in text.replace("\r\n", "\n").replace("\r", "\n").split("\n")]
    return "\n".join(lines).rstrip("\n")


def prompt_digest(text: str) -> str:
    return hashlib.sha256(normalize_prompt(text).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str
    step_tag: StepId | None = None
    timestamp: str = ""


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_output_tokens: int = 2048


@dataclass(frozen=True)
class Transcript:
    """Append-only conversation history.

    Roles alternate user/assistant after any leading system message; the
    builder methods preserve that by construction.
    """

    messages: tuple[ChatMessage, ...] = ()
    model_id: str = ""
    params: GenerationParams = field(default_factory=GenerationParams)

    def extend(self, *new_messages: ChatMessage) -> "Transcript":
        return Transcript(self.messages + tuple(new_messages), self.model_id, self.params)

    def with_model(self, model_id: str) -> "Transcript":
        return Transcript(self.messages, model_id, self.params)

    def __len__(self) -> int:
        return len(self.messages)

    def pairs(self) -> tuple[tuple[ChatMessage, ChatMessage], ...]:
        """(user, assistant) pairs in order; unpaired messages are skipped."""
        out = []
        pending: ChatMessage | None = None
        for message in self.messages:
            if message.role == "user":
                pending = message
            elif message.role == "assistant" and pending is not None:
                out.append((pending, message))
                pending = None
        return tuple(out)

    def last_response_for(self, step: StepId) -> ChatMessage | None:
        for message in reversed(self.messages):
            if message.role == "assistant" and message.step_tag == step:
                return message
        return None


@dataclass(frozen=True)
class ReplayEntry:
    step: str | None
    digest: str
    prompt: str | None
    response: str


@dataclass(frozen=True)
class ReplayFixture:
    entries: tuple[ReplayEntry, ...] = ()

    def lookup(self, step_tag: StepId | None, digest: str) -> str:
        key = step_tag.value if step_tag else None
        for entry in self.entries:
            if entry.step == key and entry.digest == digest:
                return entry.response
        raise errors.ReplayMiss(key, digest)

    @classmethod
    def from_entries(cls, entries: list[ReplayEntry]) -> "ReplayFixture":
        # (step, digest) must be unique; identical duplicates collapse.
        by_key: dict[tuple[str | None, str], ReplayEntry] = {}
        ordered: list[tuple[str | None, str]] = []
        for entry in entries:
            key = (entry.step, entry.digest)
            if key in by_key:
                if by_key[key].response != entry.response:
                    raise errors.IoError(
                        f"conflicting replay entries for step {entry.step!r} digest {entry.digest[:12]}…"
                    )
                continue
            by_key[key] = entry
            ordered.append(key)
        return cls(tuple(by_key[key] for key in ordered))

    @classmethod
    def from_text(cls, text: str) -> "ReplayFixture":
        first = next((line.strip() for line in text.splitlines() if line.strip()), "")
        if first != FIXTURE_HEADER:
            raise errors.IoError(f"not a replay fixture: expected leading {FIXTURE_HEADER!r} line")
        entries: list[ReplayEntry] = []
        step: str | None = None
        digest: str | None = None
        section: str | None = None
        buffers: dict[str, list[str]] = {}

        def flush() -> None:
            nonlocal step, digest, section, buffers
            if not buffers and digest is None:
                step, section = None, None
                return
            prompt = "\n".join(buffers.get("prompt", [])) if "prompt" in buffers else None
            response = "\n".join(buffers.get("response", [])).rstrip("\n")
            entry_digest = digest or (prompt_digest(prompt) if prompt is not None else None)
            if entry_digest is None:
                raise errors.IoError("replay entry lacks both prompt and digest")
            entries.append(ReplayEntry(step, entry_digest, prompt, response))
            step, digest, section, buffers = None, None, None, {}

        for line in text.replace("\r\n", "\n").split("\n"):
            if line.startswith("#% fixture"):
                continue
            if line.startswith("#% step:"):
                flush()
                step = line.split(":", 1)[1].strip() or None
            elif line.startswith("#% digest:"):
                digest = line.split(":", 1)[1].strip()
            elif line.startswith("#% prompt"):
                section = "prompt"
                buffers.setdefault("prompt", [])
            elif line.startswith("#% response"):
                section = "response"
                buffers.setdefault("response", [])
            elif section is not None:
                buffers[section].append(line)
        flush()
        return cls.from_entries(entries)

    @classmethod
    def from_path(cls, path: str | Path) -> "ReplayFixture":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise errors.IoError(f"cannot read replay fixture {path}: {exc}") from exc
        return cls.from_text(text)


def record(transcript: Transcript, fixture_path: str | Path) -> ReplayFixture:
    """Write a replay fixture containing one entry per exchange in the transcript."""
    pairs = transcript.pairs()
    if not pairs:
        raise errors.IoError("cannot record an empty transcript")
    entries: list[ReplayEntry] = []
    by_key: dict[tuple[str | None, str], int] = {}
    for user, assistant in pairs:
        tag = user.step_tag.value if user.step_tag else None
        key = (tag, prompt_digest(user.content))
        entry = ReplayEntry(tag, key[1], user.content, assistant.content)
        if key in by_key:  # a rerun of the same prompt: keep the latest response
            entries[by_key[key]] = entry
        else:
            by_key[key] = len(entries)
            entries.append(entry)
    chunks = [FIXTURE_HEADER, ""]
    for entry in entries:
        chunks.append(f"#% step: {entry.step or ''}")
        chunks.append("#% prompt")
        chunks.append(entry.prompt or "")
        chunks.append("#% response")
        chunks.append(entry.response)
        chunks.append("")
    try:
        Path(fixture_path).write_text("\n".join(chunks), encoding="utf-8")
    except OSError as exc:
        raise errors.IoError(f"cannot write replay fixture {fixture_path}: {exc}") from exc
    return ReplayFixture(tuple(entries))


class ChatClient(Protocol):
    model_id: str | None

    def complete(
        self, transcript: Transcript, new_user_message: str, step_tag: StepId | None = None
    ) -> tuple[Transcript, ChatMessage]:
        """Append the user message and the provider's reply; return both."""
        ...


def _require_prompt(new_user_message: str) -> None:
    if not new_user_message.strip():
        raise errors.EmptyPrompt("refusing to send an empty user message")


@dataclass
class ReplayClient:
    """Serves responses from a recorded fixture; never touches the network."""

    fixture: ReplayFixture
    model_id: str | None = "replay"
    clock: Clock = utc_now

    def complete(
        self, transcript: Transcript, new_user_message: str, step_tag: StepId | None = None
    ) -> tuple[Transcript, ChatMessage]:
        _require_prompt(new_user_message)
        response = self.fixture.lookup(step_tag, prompt_digest(new_user_message))
        now = self.clock()
        user = ChatMessage("user", new_user_message, step_tag, now)
        assistant = ChatMessage("assistant", response, step_tag, now)
        return transcript.extend(user, assistant), assistant


@dataclass
class LiveClient:
    """Chat-completion client for a JSON HTTP provider, with bounded retries."""

    endpoint: str
    model_id: str
    api_key_env: str = "PATTERNBENCH_API_KEY"
    params: GenerationParams = field(default_factory=GenerationParams)
    max_retries: int = 3
    timeout: float = 60.0
    clock: Clock = utc_now

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(
        self, transcript: Transcript, new_user_message: str, step_tag: StepId | None = None
    ) -> tuple[Transcript, ChatMessage]:
        _require_prompt(new_user_message)
        history = [{"role": m.role, "content": m.content} for m in transcript.messages]
        history.append({"role": "user", "content": new_user_message})
        payload = {
            "model": self.model_id,
            "messages": history,
            "temperature": self.params.temperature,
            "max_tokens": self.params.max_output_tokens,
        }
        url = self.endpoint.rstrip("/") + "/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                reply = httpx.post(url, json=payload, headers=self._headers(), timeout=self.timeout)
                if reply.status_code >= 500:
                    raise errors.ProviderError(f"provider returned {reply.status_code}")
                if reply.status_code >= 400:
                    # Client errors (auth, bad request) are not transient; surface at once.
                    raise errors.ProviderError(
                        f"provider rejected request: {reply.status_code} {reply.text[:200]}"
                    ) from None
                content = reply.json()["choices"][0]["message"]["content"]
                now = self.clock()
                user = ChatMessage("user", new_user_message, step_tag, now)
                assistant = ChatMessage("assistant", content, step_tag, now)
                return transcript.extend(user, assistant), assistant
            except errors.ProviderError as exc:
                if "rejected" in str(exc):
                    raise
                last_error = exc
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
            if attempt + 1 < self.max_retries:
                delay = 0.5 * 2**attempt
                log.warning(
                    "provider call failed (attempt %d): %s; retrying in %.1fs", attempt + 1, last_error, delay
                )
                time.sleep(delay)
        raise errors.ProviderError(f"provider unavailable after {self.max_retries} attempts: {last_error}")


def make_client(
    mode: str,
    fixture_path: str | None = None,
    endpoint: str = "",
    model_id: str = "",
    api_key_env: str = "PATTERNBENCH_API_KEY",
    clock: Clock = utc_now,
) -> ChatClient:
    """Build the client for a gateway mode; record mode uses the live client
    (the fixture is written from the transcript at save time)."""
    if mode == "replay":
        if not fixture_path:
            raise errors.IoError("replay mode needs a fixture path")
        return ReplayClient(ReplayFixture.from_path(fixture_path), clock=clock)
    if mode in ("live", "record"):
        return LiveClient(endpoint=endpoint, model_id=model_id, api_key_env=api_key_env, clock=clock)
    raise errors.IoError(f"unknown gateway mode {mode!r}")
