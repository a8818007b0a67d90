"""Loading known-use narratives from example files."""

from __future__ import annotations

from pathlib import Path

import yaml

from . import errors
from .model import KnownUse
from .naming import slugify


def _split_front_matter(text: str) -> tuple[dict, str]:
    stripped = text.lstrip("﻿")
    if not stripped.startswith("---"):
        return {}, text
    first, _, rest = stripped.partition("\n")
    if first.strip() != "---":
        return {}, text
    header, sep, remainder = rest.partition("\n---")
    if not sep:
        return {}, text
    try:
        meta = yaml.safe_load(header)
    except yaml.YAMLError as exc:
        raise errors.MalformedExample(f"bad example metadata: {exc}") from exc
    body = remainder.partition("\n")[2]  # drop the rest of the delimiter line
    return meta if isinstance(meta, dict) else {}, body


def parse_example_text(text: str, fallback_name: str | None = None) -> KnownUse:
    """Build a known use from an example document.

    The document may open with a metadata block delimited by ``---`` lines
    whose ``name`` entry names the example; the rest is the narrative.
    Without a block the whole text is the narrative and ``fallback_name``
    supplies the name.
    """
    meta, body = _split_front_matter(text)
    name = str(meta.get("name") or "").strip() or (fallback_name or "").strip()
    narrative = body.strip()
    if not name:
        raise errors.MalformedExample("example has no name; add a name: entry or pass one explicitly")
    if not narrative:
        raise errors.MalformedExample(f"example {name!r} has an empty narrative")
    return KnownUse(id=slugify(name), name=name, narrative=narrative)


def load_example_file(path: str | Path) -> KnownUse:
    """Read one example file; the file stem names unlabelled examples."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise errors.IoError(f"cannot read example file {p}: {exc}") from exc
    fallback = p.stem.replace("-", " ").replace("_", " ").strip().title()
    return parse_example_text(text, fallback_name=fallback)
