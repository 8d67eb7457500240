"""Document editing: ask the model for an edited copy of one slide's JSON.

The edited slide must keep the structure of the original. That rule is
checked here rather than trusted: object ids, paragraph counts and run
counts have to match, and only values may differ.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from .errors import EditParseError, InternalError, StructureMismatch
from .llmjson import loads_lenient
from .planner import Task
from .slidejson import SchemaError, SlideJson, dumps, validate_slide_json

_EDITOR_TEMPLATE = """Information about slide {page_number}:

- Task description: {description}

- Action type: {action}

- Slide contents: {contents}

You are a specialized AI that analyzes PowerPoint slide content and performs specific tasks. You will receive the following JSON data, perform the designated tasks, and return the results in exactly the same JSON format.

Important rules:
1. You must maintain the exact input JSON structure

2. Only perform the work described in the 'action' within 'tasks'

3. Only modify the elements specified in 'target' within 'tasks'

4. Output must contain pure JSON only - no explanations or additional text

5. Preserve all formatting information (fonts, sizes, colors, etc.)

6. Verify that the JSON format is valid after completing the task


Before starting the task:

1. Check the 'understanding' field to grasp the overall task objective

2. Review 'page number', 'description', 'target', and 'action' within 'tasks'

3. Identify all text elements in 'Objects_Detail'

The output must maintain the identical structure as the original JSON, with only the necessary text modified according to the task.

Give only the JSON."""


@dataclass
class EditDiff:
    changed_paths: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.changed_paths


def build_editor_prompt(task: Task, before: SlideJson, understanding: str = "") -> str:
    """Fill the editing template for ``task`` and append the task record it refers to."""
    if task.page_number != before.get("slide_index"):
        raise InternalError(
            f"task targets page {task.page_number} but slide JSON is slide {before.get('slide_index')}"
        )
    prompt = _EDITOR_TEMPLATE.format(
        page_number=task.page_number,
        description=task.description,
        action=task.action,
        contents=dumps(before),
    )
    # the template's rules point at 'understanding' and 'tasks'; supply them
    context = {"understanding": understanding, "tasks": [task.to_dict()]}
    return prompt + "\n\nTask data:\n" + dumps(context)


def parse_edited_slide(llm_output: str) -> SlideJson:
    try:
        obj = loads_lenient(llm_output)
    except json.JSONDecodeError as exc:
        raise EditParseError(f"editor output is not JSON: {exc}", llm_output) from None
    try:
        validate_slide_json(obj)
    except SchemaError as exc:
        raise EditParseError(f"editor output is not a valid slide: {exc}", llm_output) from None
    return obj


def _counts(obj: dict) -> tuple:
    paras = obj.get("paragraphs")
    if paras is None:
        return (None,)
    return tuple(len(p.get("runs", [])) for p in paras)


def _structure_problems(before: SlideJson, after: SlideJson) -> list[str]:
    problems = []
    ids_before = Counter(o["id"] for o in before["objects"])
    ids_after = Counter(o["id"] for o in after["objects"])
    if ids_before != ids_after:
        missing = sorted((ids_before - ids_after).elements())
        extra = sorted((ids_after - ids_before).elements())
        if missing:
            problems.append(f"objects removed: {missing}")
        if extra:
            problems.append(f"objects added: {extra}")
        return problems
    after_by_id = {o["id"]: o for o in after["objects"]}
    for obj in before["objects"]:
        a, b = _counts(obj), _counts(after_by_id[obj["id"]])
        if a == b:
            continue
        if a == (None,) or b == (None,):
            problems.append(f"object {obj['id']}: paragraphs added or removed")
        elif len(a) != len(b):
            problems.append(f"object {obj['id']}: {len(a)} paragraphs became {len(b)}")
        else:
            for i, (x, y) in enumerate(zip(a, b)):
                if x != y:
                    problems.append(f"object {obj['id']} paragraph {i}: {x} runs became {y}")
    return problems


def _escape(key: Any) -> str:
    return str(key).replace("~", "~0").replace("/", "~1")


def json_diff(before: Any, after: Any, path: str = "") -> list[str]:
    """JSON-pointer paths of every leaf that differs between the two values."""
    if isinstance(before, dict) and isinstance(after, dict):
        out = []
        for key in list(before) + [k for k in after if k not in before]:
            sub = f"{path}/{_escape(key)}"
            if key not in before or key not in after:
                out.append(sub)
            else:
                out += json_diff(before[key], after[key], sub)
        return out
    if isinstance(before, list) and isinstance(after, list) and len(before) == len(after):
        out = []
        for i, (x, y) in enumerate(zip(before, after)):
            out += json_diff(x, y, f"{path}/{i}")
        return out
    # bool is an int subclass; keep True and 1 apart
    if type(before) is not type(after) or before != after:
        return [path]
    return []


def validate_edited_slide(before: SlideJson, after: SlideJson, task: Task | None = None) -> EditDiff:
    """Accept ``after`` when it keeps the structure of ``before``; report what changed.

    Objects are paired by id, so a reordered object list is not a change
    of structure. Paths in the diff refer to positions in ``after``.
    """
    problems = _structure_problems(before, after)
    if problems:
        raise StructureMismatch(problems)
    position = {o["id"]: i for i, o in enumerate(after["objects"])}
    paths: list[str] = []
    for key in list(before) + [k for k in after if k not in before]:
        if key == "objects":
            continue
        if key not in before or key not in after:
            paths.append(f"/{_escape(key)}")
        else:
            paths += json_diff(before[key], after[key], f"/{_escape(key)}")
    for i, obj in enumerate(before["objects"]):
        j = position[obj["id"]]
        if j != i:
            paths.append(f"/objects/{j}/id")
        paths += json_diff(obj, after["objects"][j], f"/objects/{j}")
    return EditDiff(paths)
