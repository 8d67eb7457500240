"""Instruction understanding: turn a user request into a per-slide plan."""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from .errors import EmptyPlan, PageOutOfRange, PlanParseError
from .llmjson import loads_lenient
from .model import Deck
from .slidejson import DeckSummary, dumps

log = logging.getLogger(__name__)

REFUSE_ACTION = "refuse"

_PLANNER_HEAD = """You are a planning assistant for PowerPoint modifications.

Your job is to create a detailed, specific, step-by-step plan for modifying a PowerPoint presentation based on the user's request.

present ppt state: """

_PLANNER_BODY = """
Break down complex requests into highly specific actionable tasks that can be executed by a PowerPoint automation system.

Focus on identifying:

1. Specific slides to modify (by page number)

2. Specific sections within slides (title, body, notes, headers, footers, etc.)

3. Specific object elements to add, remove, or change (text boxes, images, shapes, charts, tables, etc.)

4. Precise formatting changes (font, size, color, alignment, etc.)

5. The logical sequence of operations with clear dependencies

Please write one task for one slide page.

Format your response as a JSON format with the following structure:
{
    "understanding": "Detailed summary of what the user wants to achieve",
    "tasks": [
        {
            "page number": 1,
            "description": "Specific task description",
            "target": "Precise target location (e.g., 'Title section of slide 1', 'Notes section of slide 3', 'Second bullet point in body text', 'Chart in bottom right')",
            "action": "Specific action with all necessary details",
            "contents": {
                "additional details required for the action"
            }
        },
        ...
    ],
}

Below is the example question and example output.

input: Please translate the titles of slide 3 and slide 5 of the PPT into English.

output:
{
    "understanding": "English translation of slide titles on slides 3 and 5",
    "tasks": [
        {
            "page number": 3,
            "description": "Translate the title text of slide 3",
            "target": "Title section of slide 3",
            "action": "Translate to English",
            "contents": {
                "source_language": "auto-detect",
                "preserve_formatting": true
            }
},
        {
            "page number": 5,
            "description": "Translate the title text of slide 5",
            "target": "Title section of slide 5",
            "action": "Translate to English",
            "contents": {
                "source_language": "auto-detect",
                "preserve_formatting": true
            }
        }
    ],
}

Response in JSON format."""


@dataclass
class Task:
    page_number: int
    description: str = ""
    target: str = ""
    action: str = ""
    contents: dict[str, Any] = field(default_factory=dict)

    @property
    def is_refusal(self) -> bool:
        return self.action.strip().lower() == REFUSE_ACTION

    def to_dict(self) -> dict:
        return {
            "page number": self.page_number,
            "description": self.description,
            "target": self.target,
            "action": self.action,
            "contents": self.contents,
        }


@dataclass
class Plan:
    understanding: str = ""
    tasks: list[Task] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"understanding": self.understanding, "tasks": [t.to_dict() for t in self.tasks]}

    def to_json(self) -> str:
        return dumps(self.to_dict())


def build_planner_prompt(instruction: str, summary: DeckSummary) -> str:
    return (
        _PLANNER_HEAD
        + dumps(summary.to_dict(), pretty=False)
        + _PLANNER_BODY
        + "\n\ninput: "
        + instruction
        + "\n\noutput:"
    )


def _task_from(obj: Any, i: int, raw: str) -> Task:
    if not isinstance(obj, dict):
        raise PlanParseError(f"task {i} is not an object", raw)
    page = obj.get("page number", obj.get("page_number"))
    if isinstance(page, str) and page.strip().isdigit():
        page = int(page.strip())
    if not isinstance(page, int) or isinstance(page, bool):
        raise PlanParseError(f"task {i}: 'page number' must be an integer", raw)
    if page < 1:
        raise PlanParseError(f"task {i}: 'page number' must be >= 1", raw)
    values = {}
    for key in ("description", "target", "action"):
        v = obj.get(key, "")
        if not isinstance(v, str):
            raise PlanParseError(f"task {i}: '{key}' must be a string", raw)
        values[key] = v
    contents = obj.get("contents", {})
    if contents is None:
        contents = {}
    if not isinstance(contents, dict):
        # models sometimes put a bare string here; keep it rather than fail
        contents = {"details": contents}
    return Task(page, values["description"], values["target"], values["action"], contents)


def parse_plan(llm_output: str) -> Plan:
    try:
        obj = loads_lenient(llm_output)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"planner output is not JSON: {exc}", llm_output) from None
    if not isinstance(obj, dict):
        raise PlanParseError("planner output must be a JSON object", llm_output)
    if "tasks" not in obj or not isinstance(obj["tasks"], list):
        raise PlanParseError("planner output needs a 'tasks' array", llm_output)
    understanding = obj.get("understanding", "")
    if not isinstance(understanding, str):
        raise PlanParseError("'understanding' must be a string", llm_output)
    tasks = [_task_from(t, i, llm_output) for i, t in enumerate(obj["tasks"])]
    return Plan(understanding, tasks)


def validate_plan(plan: Plan, deck: Deck) -> Plan:
    """Accept ``plan`` for ``deck`` or raise; the plan itself is never modified."""
    if not plan.tasks:
        raise EmptyPlan("plan has no tasks")
    count = len(deck.slides)
    for i, task in enumerate(plan.tasks):
        if task.is_refusal:
            continue
        if not 1 <= task.page_number <= count:
            raise PageOutOfRange(i, task.page_number, count)
    pages = Counter(t.page_number for t in plan.tasks if not t.is_refusal)
    repeated = sorted(p for p, n in pages.items() if n > 1)
    if repeated:
        log.warning("plan has several tasks for page(s) %s; running them in order", repeated)
    return plan
