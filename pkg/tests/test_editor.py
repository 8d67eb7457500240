"""Document editing: prompt, parsing, structure checks and diffs."""
from __future__ import annotations

import copy
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deckhand.editor import build_editor_prompt, json_diff, parse_edited_slide, validate_edited_slide
from deckhand.errors import EditParseError, InternalError, StructureMismatch
from deckhand.package import load_deck
from deckhand.planner import Task
from deckhand.slidejson import slide_to_json


@pytest.fixture
def before(corpus):
    return slide_to_json(load_deck(corpus["mixed_runs"]), 1)


class TestPrompt:
    def test_fills_template(self, before):
        task = Task(1, "Translate", "title", "Translate to English")
        prompt = build_editor_prompt(task, before, "translate titles")
        assert prompt.startswith("Information about slide 1:")
        assert "- Task description: Translate" in prompt
        assert "- Action type: Translate to English" in prompt
        assert '"text": "bold red"' in prompt
        assert prompt.count("Give only the JSON.") == 1
        data = json.loads(prompt.split("Task data:\n", 1)[1])
        assert data == {"understanding": "translate titles", "tasks": [task.to_dict()]}

    def test_page_mismatch(self, before):
        with pytest.raises(InternalError):
            build_editor_prompt(Task(2), before)


class TestParse:
    def test_fenced(self, before):
        assert parse_edited_slide("```json\n" + json.dumps(before) + "\n```") == before

    def test_not_json(self):
        with pytest.raises(EditParseError):
            parse_edited_slide("sorry")

    def test_not_a_slide(self):
        with pytest.raises(EditParseError):
            parse_edited_slide('{"objects": 3}')


class TestValidate:
    def test_value_change(self, before):
        after = copy.deepcopy(before)
        after["objects"][0]["paragraphs"][0]["runs"][1]["text"] = "BOLD"
        after["notes"] = "n"
        diff = validate_edited_slide(before, after)
        assert diff.changed_paths == ["/notes", "/objects/0/paragraphs/0/runs/1/text"]

    def test_identical_is_empty(self, before):
        assert validate_edited_slide(before, copy.deepcopy(before)).empty

    def test_run_count_change(self, before):
        after = copy.deepcopy(before)
        after["objects"][0]["paragraphs"][0]["runs"].pop()
        with pytest.raises(StructureMismatch):
            validate_edited_slide(before, after)

    def test_paragraph_count_change(self, before):
        after = copy.deepcopy(before)
        after["objects"][0]["paragraphs"].pop()
        with pytest.raises(StructureMismatch):
            validate_edited_slide(before, after)

    def test_object_removed(self, before):
        after = copy.deepcopy(before)
        after["objects"] = []
        with pytest.raises(StructureMismatch) as info:
            validate_edited_slide(before, after)
        assert "objects removed" in str(info.value)

    def test_reorder_is_not_structural(self, corpus):
        b = slide_to_json(load_deck(corpus["group"]), 1)
        a = copy.deepcopy(b)
        a["objects"].reverse()
        paths = validate_edited_slide(b, a).changed_paths
        assert "/objects/1/id" in paths and "/objects/0/id" in paths


def leaves(value, path=""):
    """Every leaf of a JSON value keyed by its pointer, with its type."""
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            out.update(leaves(v, f"{path}/{str(k).replace('~', '~0').replace('/', '~1')}"))
        return out
    if isinstance(value, list):
        out = {}
        for i, v in enumerate(value):
            out.update(leaves(v, f"{path}/{i}"))
        return out
    return {path: (type(value), value)}


scalars = st.none() | st.booleans() | st.integers(-3, 3) | st.text(alphabet="ab/~", max_size=2)
trees = st.recursive(scalars, lambda inner: st.lists(inner, max_size=3)
                     | st.dictionaries(st.text(alphabet="xy/~", max_size=2), inner, max_size=3), max_leaves=12)


@st.composite
def same_shape_pairs(draw):
    before = draw(trees)
    spots = leaves(before)
    replacement = {p: draw(scalars) for p in spots if draw(st.booleans())}

    def rebuild(value, path=""):
        if isinstance(value, dict):
            return {k: rebuild(v, f"{path}/{str(k).replace('~', '~0').replace('/', '~1')}") for k, v in value.items()}
        if isinstance(value, list):
            return [rebuild(v, f"{path}/{i}") for i, v in enumerate(value)]
        return replacement.get(path, value)

    return before, rebuild(before)


@settings(max_examples=300, deadline=None)
@given(same_shape_pairs())
def test_diff_matches_leaf_oracle(pair):
    before, after = pair
    a, b = leaves(before), leaves(after)
    # scalar replacing an empty container shows up as a missing leaf, not a diff
    if set(a) != set(b):
        return
    expected = sorted(p for p in a if a[p] != b[p] or a[p][0] is not b[p][0])
    assert sorted(json_diff(before, after)) == expected


@settings(max_examples=300, deadline=None)
@given(trees, trees)
def test_diff_empty_exactly_when_equal(x, y):
    same = json.dumps(x, sort_keys=True) == json.dumps(y, sort_keys=True)
    assert (json_diff(x, y) == []) == same
