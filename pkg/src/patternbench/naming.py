"""Name normalization and fuzzy matching.

Artifact names arrive in many spellings (numbered list heads, bold markup,
"&" for "and", trailing punctuation). Every comparison in the workbench
goes through :func:`normalize_name`; lookups that must tolerate paraphrase
go through :func:`resolve_name`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from difflib import SequenceMatcher
from typing import Iterable, Sequence

# Accept a near-miss when the normalized similarity ratio reaches this bound.
# "Custom App Logic" vs "Custom Application Logic" sits exactly at 0.80.
SIMILARITY_THRESHOLD = 0.8

_WS_RE = re.compile(r"\s+")
_TRAILING_PUNCT_RE = re.compile(r"[\s.,;:!?\-*_'\"`]+$")
_SLUG_RE = re.compile(r"[^a-z0-9]+")


def normalize_name(name: str) -> str:
    """Case-fold, trim, collapse whitespace, strip trailing punctuation, "&" -> "and"."""
    text = name.replace("&", " and ")
    text = _WS_RE.sub(" ", text).strip().casefold()
    return _TRAILING_PUNCT_RE.sub("", text)


def slugify(name: str) -> str:
    """Stable lowercase identifier for a name ("Content generation" -> "content-generation")."""
    return _SLUG_RE.sub("-", normalize_name(name)).strip("-")


def similarity(a: str, b: str) -> float:
    """Similarity ratio of two already-normalized strings."""
    return SequenceMatcher(None, a, b).ratio()


@dataclass(frozen=True)
class Match:
    """Outcome of a name lookup.

    kind is one of "exact", "fuzzy", "ambiguous", "none"; value is the
    canonical candidate for the first two kinds and None otherwise.
    """

    value: str | None
    kind: str

    @property
    def resolved(self) -> bool:
        return self.value is not None


def resolve_name(raw: str, candidates: Sequence[str] | Iterable[str]) -> Match:
    """Resolve ``raw`` against candidate names.

    Exact normalized equality wins outright. Otherwise candidates at or
    above SIMILARITY_THRESHOLD are collected; a single hit resolves, two or
    more is ambiguous and resolves to nothing (callers warn, never guess).
    """
    pool = list(candidates)
    needle = normalize_name(raw)
    if not needle:
        return Match(None, "none")
    for candidate in pool:
        if normalize_name(candidate) == needle:
            return Match(candidate, "exact")
    close = [c for c in pool if similarity(needle, normalize_name(c)) >= SIMILARITY_THRESHOLD]
    if len(close) == 1:
        return Match(close[0], "fuzzy")
    if close:
        return Match(None, "ambiguous")
    return Match(None, "none")
