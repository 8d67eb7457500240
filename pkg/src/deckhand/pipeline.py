"""End-to-end editing of one deck for one instruction."""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional, Union

from .editor import build_editor_prompt, parse_edited_slide, validate_edited_slide
from .errors import DeckhandError, EditError, ProviderError, UsageError
from .executor import TaskResult, run_direct, run_with_reflection
from .model import Deck
from .package import load_deck, save_deck
from .planner import Plan, Task, build_planner_prompt, parse_plan, validate_plan
from .provider import LLMClient, UsageLedger
from .slidejson import deck_summary, slide_to_json

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]
STATUSES = ("success", "partial", "refused", "failed")


@dataclass
class EditOutcome:
    status: str
    task_results: list[TaskResult] = field(default_factory=list)
    ledger: UsageLedger = field(default_factory=UsageLedger)
    wall_time_seconds: Decimal = Decimal(0)
    output_path: Optional[str] = None
    plan: Optional[Plan] = None
    diagnostics: list[str] = field(default_factory=list)
    # the edited deck, kept in memory for callers that want to inspect it
    deck: Optional[Deck] = field(default=None, repr=False)

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "status": self.status,
            "output_path": self.output_path,
            "plan": self.plan.to_dict() if self.plan is not None else None,
            "task_results": [r.to_dict() for r in self.task_results],
            "usage": self.ledger.to_dict(),
            "diagnostics": list(self.diagnostics),
        }
        if timing:
            out["wall_time_seconds"] = float(self.wall_time_seconds)
        return out


def default_output_path(deck_path: PathLike) -> Path:
    p = Path(deck_path)
    return p.with_name(p.stem + ".edited.pptx")


def overall_status(results: list[TaskResult]) -> str:
    statuses = [r.status for r in results]
    if statuses and all(s == "success" for s in statuses):
        return "success"
    if statuses and all(s == "refused" for s in statuses):
        return "refused"
    if any(s == "success" for s in statuses):
        return "partial"
    return "failed"


def _check_paths(instruction: str, deck_path: PathLike, out_path: Optional[PathLike],
                 overwrite: bool) -> Path:
    if not instruction or not instruction.strip():
        raise UsageError("instruction is empty")
    out = Path(out_path) if out_path is not None else default_output_path(deck_path)
    if out.resolve() == Path(deck_path).resolve() and not overwrite:
        raise UsageError("output path equals the input deck; pass overwrite=True to replace it")
    return out


def run_editor(task: Task, before: dict, client: LLMClient, understanding: str = "") -> tuple[dict, list[str]]:
    """One editor call; on a bad reply the slide is passed on unchanged."""
    prompt = build_editor_prompt(task, before, understanding)
    raw = client.complete("editor", prompt).text
    try:
        after = parse_edited_slide(raw)
        validate_edited_slide(before, after, task)
    except EditError as exc:
        # structural tasks cannot keep the structure; codegen works from the task text
        note = f"page {task.page_number}: editor output rejected ({type(exc).__name__}: {exc}); using the slide unchanged"
        log.info(note)
        return before, [note]
    return after, []


def edit_deck(instruction: str, deck_path: PathLike, client: LLMClient, *,
              out_path: Optional[PathLike] = None, overwrite: bool = False,
              max_attempts: Optional[int] = None) -> EditOutcome:
    """Plan, edit and apply ``instruction`` to the deck at ``deck_path``.

    Model failures end up in the outcome's status; only file-system
    problems and bad arguments raise.
    """
    out = _check_paths(instruction, deck_path, out_path, overwrite)
    client = client.with_ledger()
    attempts = max_attempts if max_attempts is not None else client.config.max_attempts
    start = time.perf_counter()
    deck = load_deck(deck_path)
    outcome = EditOutcome("failed", ledger=client.ledger)
    current = deck
    try:
        summary = deck_summary(deck)
        raw_plan = client.complete("planner", build_planner_prompt(instruction, summary)).text
        plan = parse_plan(raw_plan)
        outcome.plan = plan
        validate_plan(plan, deck)
        for task in plan.tasks:
            if task.is_refusal:
                outcome.task_results.append(TaskResult(task, "refused", reason=task.description or None))
                continue
            if not 1 <= task.page_number <= len(current.slides):
                # an earlier task removed slides
                outcome.task_results.append(TaskResult(
                    task, "failed", diagnostics=[f"page {task.page_number} no longer exists"]))
                continue
            before = slide_to_json(current, task.page_number)
            after, notes = run_editor(task, before, client, plan.understanding)
            current, result = run_with_reflection(task, before, after, current, client, attempts)
            result.diagnostics = notes + result.diagnostics
            outcome.task_results.append(result)
    except DeckhandError as exc:
        # planner errors, provider errors, broken stage preconditions
        outcome.diagnostics.append(f"{type(exc).__name__}: {exc}")
    if outcome.diagnostics:
        done = any(r.status == "success" for r in outcome.task_results)
        outcome.status = "partial" if done else "failed"
    else:
        outcome.status = overall_status(outcome.task_results)
    _finish(outcome, current, deck, out, start)
    return outcome


def direct_edit(instruction: str, deck_path: PathLike, client: LLMClient, *,
                out_path: Optional[PathLike] = None, overwrite: bool = False) -> EditOutcome:
    """Baseline: one script for the whole deck from one call, no retries."""
    out = _check_paths(instruction, deck_path, out_path, overwrite)
    client = client.with_ledger()
    start = time.perf_counter()
    deck = load_deck(deck_path)
    outcome = EditOutcome("failed", ledger=client.ledger)
    current = deck
    try:
        current, result = run_direct(instruction, deck, client)
        outcome.task_results.append(result)
        outcome.status = result.status
    except ProviderError as exc:
        outcome.diagnostics.append(f"{type(exc).__name__}: {exc}")
    _finish(outcome, current, deck, out, start)
    return outcome


def _finish(outcome: EditOutcome, current: Deck, original: Deck, out: Path, start: float) -> None:
    outcome.deck = current
    if current is not original and any(r.status == "success" for r in outcome.task_results):
        save_deck(current, out)
        outcome.output_path = str(out)
    outcome.wall_time_seconds = Decimal(str(round(time.perf_counter() - start, 6)))
