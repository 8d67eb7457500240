"""Code generation with self-reflection.

The model is asked for an EditScript that turns the slide as it is
(``before``) into the slide the editor produced (``after``). Each failed
attempt, with its output and the error it caused, is appended to the next
prompt. A script counts as successful only once the edited deck survives
a save and re-load and shows the new text the editor asked for.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .errors import ApplyError, ScriptParseError, ScriptValidationError
from .model import Deck
from .package import deck_to_bytes, read_deck
from .planner import Task
from .provider import LLMClient
from .script import GRAMMAR_TEXT, EditScript, apply_script, parse_edit_script, script_text
from .slidejson import SlideJson, deck_to_json, dumps

log = logging.getLogger(__name__)

OUTCOMES = ("parse_error", "validation_error", "apply_error", "post_check_error", "success", "refused")
STRUCTURE_OPS = {"add_slide", "delete_slide", "duplicate_slide", "move_slide"}


@dataclass
class Attempt:
    prompt_chars: int
    raw_output: str
    outcome: str
    error_text: Optional[str] = None

    def to_dict(self) -> dict:
        return {"prompt_chars": self.prompt_chars, "raw_output": self.raw_output,
                "outcome": self.outcome, "error_text": self.error_text}


@dataclass
class ReflectionTrace:
    attempts: list[Attempt] = field(default_factory=list)

    @property
    def outcomes(self) -> list[str]:
        return [a.outcome for a in self.attempts]

    def __len__(self) -> int:
        return len(self.attempts)

    def to_dict(self) -> dict:
        return {"attempts": [a.to_dict() for a in self.attempts]}


@dataclass
class TaskResult:
    task: Task
    status: str  # success | refused | failed
    trace: ReflectionTrace = field(default_factory=ReflectionTrace)
    applied_ops: int = 0
    reason: Optional[str] = None
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"task": self.task.to_dict(), "status": self.status, "applied_ops": self.applied_ops,
               "trace": self.trace.to_dict()}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        return out


def build_codegen_prompt(before: SlideJson, after: SlideJson, task: Task) -> str:
    return "\n".join([
        "Write an EditScript that changes a PowerPoint deck as described below.",
        "",
        f"1. Slide to work on (page number, starting at 1): {task.page_number}",
        f"2. Target to change: {dumps(before)}",
        f"3. New content to apply: {dumps(after)}",
        f"4. Task: {dumps(task.to_dict())}",
        "",
        "When 2 and 3 are identical the task needs a structural change (slides, objects, notes);"
        " derive the ops from the task itself.",
        "Address objects by the \"id\" values shown above. Emit only the ops needed.",
        "If the task cannot be carried out on this deck, reply with a single refuse op.",
        "",
        GRAMMAR_TEXT,
        "",
        "Reply with the JSON script only.",
    ])


def build_direct_prompt(instruction: str, deck_json: list[SlideJson]) -> str:
    return "\n".join([
        "The following is information parsed from a PowerPoint deck.",
        dumps(deck_json),
        "Write an EditScript that carries out this instruction on the deck:",
        instruction,
        "",
        GRAMMAR_TEXT,
        "",
        "Reply with the JSON script only.",
    ])


def _reflection_block(trace: ReflectionTrace) -> str:
    parts = []
    for k, attempt in enumerate(trace.attempts, start=1):
        parts += [
            "",
            f"Attempt {k} produced:",
            attempt.raw_output,
            f"It failed with this error ({attempt.outcome}):",
            attempt.error_text or "",
        ]
    parts += ["", "Fix the error and reply with a corrected script."]
    return "\n".join(parts)


def _run_texts(slide: SlideJson) -> set[str]:
    out = set()
    for obj in slide["objects"]:
        for p in obj.get("paragraphs") or []:
            for r in p["runs"]:
                out.add(script_text(r["text"]))
    return out


def _slide_lines(slide: SlideJson) -> list[str]:
    lines = []
    for obj in slide["objects"]:
        for p in obj.get("paragraphs") or []:
            lines.append("".join(r["text"] for r in p["runs"]))
    return lines


def post_check(before: SlideJson, after: SlideJson, script: EditScript, result: Deck,
               page_number: int) -> Optional[str]:
    """Return an error text when ``result`` does not show what ``after`` asks for."""
    try:
        reloaded = read_deck(deck_to_bytes(result))
    except Exception as exc:  # any failure here means a corrupt output deck
        return f"edited deck does not re-load: {type(exc).__name__}: {exc}"
    if before == after:
        return None
    slides = deck_to_json(reloaded)
    structural = any(op.name in STRUCTURE_OPS for op in script.ops)
    if not structural and 1 <= page_number <= len(slides):
        scope = [slides[page_number - 1]]
    else:
        scope = slides
    lines = [line for s in scope for line in _slide_lines(s)]
    missing = []
    for text in sorted(_run_texts(after) - _run_texts(before)):
        if text.strip() and not any(text in line for line in lines):
            missing.append(text)
    problems = []
    if missing:
        problems.append("text not found on the slide after the edit: " + "; ".join(repr(t) for t in missing))
    if after.get("notes") != before.get("notes"):
        want = (after.get("notes") or "").strip()
        if not any(s["notes"].strip() == want for s in scope):
            problems.append(f"notes should read {want!r}")
    return " / ".join(problems) or None


def _attempt(raw: str, prompt: str, deck: Deck, before: Optional[SlideJson], after: Optional[SlideJson],
             page_number: int) -> tuple[Attempt, Optional[Deck], int, Optional[str]]:
    """Run one model output through parse, validate, apply and post-check."""
    def fail(outcome: str, exc: object) -> tuple:
        return Attempt(len(prompt), raw, outcome, str(exc)), None, 0, None

    try:
        script = parse_edit_script(raw)
    except ScriptParseError as exc:
        return fail("parse_error", exc)
    if script.is_refusal:
        reason = script.ops[0].args["reason"]
        return Attempt(len(prompt), raw, "refused"), deck, 0, reason
    try:
        new_deck, report = apply_script(script, deck)
    except ScriptValidationError as exc:
        return fail("validation_error", exc)
    except ApplyError as exc:
        return fail("apply_error", exc)
    # without a before/after pair only the re-load check applies
    empty: SlideJson = {"objects": []}
    problem = post_check(before or empty, after or empty, script, new_deck, page_number)
    if problem:
        return fail("post_check_error", problem)
    return Attempt(len(prompt), raw, "success"), new_deck, report.applied_ops, None


def run_with_reflection(task: Task, before: SlideJson, after: SlideJson, deck: Deck, client: LLMClient,
                        max_attempts: int = 3) -> tuple[Deck, TaskResult]:
    """Generate and apply a script, retrying with error feedback.

    Returns the edited deck on success; on refusal or exhaustion the input
    deck is returned as it was. Provider failures propagate to the caller.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    base = build_codegen_prompt(before, after, task)
    trace = ReflectionTrace()
    for _ in range(max_attempts):
        prompt = base + _reflection_block(trace) if trace.attempts else base
        raw = client.complete("codegen", prompt).text
        attempt, new_deck, applied, reason = _attempt(raw, prompt, deck, before, after, task.page_number)
        trace.attempts.append(attempt)
        if attempt.outcome == "success":
            return new_deck, TaskResult(task, "success", trace, applied)
        if attempt.outcome == "refused":
            return deck, TaskResult(task, "refused", trace, 0, reason=reason)
        log.info("task page %s attempt %d: %s: %s", task.page_number, len(trace),
                 attempt.outcome, attempt.error_text)
    return deck, TaskResult(task, "failed", trace)


def run_direct(instruction: str, deck: Deck, client: LLMClient) -> tuple[Deck, TaskResult]:
    """Single-shot baseline: one script from the whole deck, no retry."""
    prompt = build_direct_prompt(instruction, deck_to_json(deck))
    raw = client.complete("codegen", prompt).text
    attempt, new_deck, applied, reason = _attempt(raw, prompt, deck, None, None, 0)
    task = Task(page_number=1, description=instruction, action="direct")
    trace = ReflectionTrace([attempt])
    if attempt.outcome == "success":
        return new_deck, TaskResult(task, "success", trace, applied)
    if attempt.outcome == "refused":
        return deck, TaskResult(task, "refused", trace, reason=reason)
    return deck, TaskResult(task, "failed", trace)
