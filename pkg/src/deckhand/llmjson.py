"""Pull a JSON value out of model output.

Models wrap JSON in Markdown fences, leave trailing commas, or add a
sentence before the payload. Repairs are applied in that order, and only
when the strict parse fails.
"""
from __future__ import annotations

import json
import re
from typing import Any

_FENCE = re.compile(r"```[A-Za-z0-9_+-]*[ \t]*\r?\n?(.*?)```", re.S)


def strip_fences(text: str) -> str:
    """Return the body of the first fenced block, or ``text`` stripped."""
    m = _FENCE.search(text)
    if m:
        return m.group(1).strip()
    return text.strip()


def remove_trailing_commas(text: str) -> str:
    """Drop commas that directly precede ``}`` or ``]`` outside string literals."""
    out: list[str] = []
    in_string = escaped = False
    pending: list[str] = []  # a comma plus following whitespace, held back
    for ch in text:
        if in_string:
            out.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if pending:
            if ch.isspace():
                pending.append(ch)
                continue
            if ch in "}]":
                out.extend(pending[1:])
            else:
                out.extend(pending)
            pending = []
        if ch == ",":
            pending = [ch]
            continue
        if ch == '"':
            in_string = True
        out.append(ch)
    out.extend(pending)
    return "".join(out)


def _outermost(text: str) -> str | None:
    starts = [i for i in (text.find("{"), text.find("[")) if i != -1]
    if not starts:
        return None
    start = min(starts)
    close = "}" if text[start] == "{" else "]"
    end = text.rfind(close)
    return text[start:end + 1] if end > start else None


def loads_lenient(text: str) -> Any:
    """Parse JSON from LLM output; raises ``json.JSONDecodeError`` on failure."""
    body = strip_fences(text)
    candidates = [body, remove_trailing_commas(body)]
    inner = _outermost(body)
    if inner is not None:
        candidates += [inner, remove_trailing_commas(inner)]
    error: json.JSONDecodeError | None = None
    for candidate in candidates:
        try:
            return json.loads(candidate)
        except json.JSONDecodeError as exc:
            error = error or exc
    assert error is not None
    raise error
