"""Instruction understanding: prompt, plan parsing and validation."""
from __future__ import annotations

import pytest

from deckhand.errors import EmptyPlan, PageOutOfRange, PlanParseError
from deckhand.package import load_deck
from deckhand.planner import Plan, Task, build_planner_prompt, parse_plan, validate_plan
from deckhand.slidejson import deck_summary

PLAN = '{"understanding": "u", "tasks": [{"page number": 2, "description": "d", "target": "t", "action": "a", "contents": {"k": 1}}]}'


class TestPrompt:
    def test_layout(self, corpus):
        summary = deck_summary(load_deck(corpus["five_slides"]))
        prompt = build_planner_prompt("Make slide 2 blue", summary)
        assert prompt.startswith("You are a planning assistant for PowerPoint modifications.")
        assert '"slide_count":5' in prompt
        assert prompt.endswith("input: Make slide 2 blue\n\noutput:")
        assert "Response in JSON format." in prompt
        # the template's example keeps single braces once filled
        assert "{{" not in prompt


class TestParse:
    def test_basic(self):
        plan = parse_plan(PLAN)
        assert plan.understanding == "u"
        assert plan.tasks == [Task(2, "d", "t", "a", {"k": 1})]

    def test_snake_case_and_string_page(self):
        plan = parse_plan('{"tasks": [{"page_number": "4", "action": "x"}]}')
        assert plan.tasks[0].page_number == 4

    def test_bare_contents_kept(self):
        plan = parse_plan('{"tasks": [{"page number": 1, "contents": "make it red"}]}')
        assert plan.tasks[0].contents == {"details": "make it red"}

    def test_wire_form_round_trips(self):
        plan = parse_plan(PLAN)
        assert parse_plan(plan.to_json()) == plan
        assert plan.to_dict()["tasks"][0]["page number"] == 2

    @pytest.mark.parametrize("text", [
        "not json",
        "[1, 2]",
        '{"understanding": "u"}',
        '{"tasks": [{"page number": "two"}]}',
        '{"tasks": [{"page number": 0}]}',
        '{"tasks": [{"page number": true}]}',
        '{"tasks": [{"page number": 1, "action": 5}]}',
        '{"tasks": ["x"]}',
    ])
    def test_rejects(self, text):
        with pytest.raises(PlanParseError) as info:
            parse_plan(text)
        assert info.value.raw == text


class TestValidate:
    def test_ok_and_untouched(self, corpus):
        deck = load_deck(corpus["five_slides"])
        plan = parse_plan(PLAN)
        before = plan.to_dict()
        assert validate_plan(plan, deck) is plan
        assert plan.to_dict() == before

    def test_empty(self, corpus):
        with pytest.raises(EmptyPlan):
            validate_plan(Plan("", []), load_deck(corpus["five_slides"]))

    def test_page_out_of_range(self, corpus):
        with pytest.raises(PageOutOfRange) as info:
            validate_plan(Plan("", [Task(1), Task(9)]), load_deck(corpus["five_slides"]))
        assert (info.value.task_index, info.value.page_number, info.value.slide_count) == (1, 9, 5)

    def test_refusal_skips_range_check(self, corpus):
        plan = Plan("", [Task(99, action="refuse")])
        assert validate_plan(plan, load_deck(corpus["one_textbox"])).tasks[0].is_refusal

    def test_repeated_page_warns(self, corpus, caplog):
        validate_plan(Plan("", [Task(1), Task(1)]), load_deck(corpus["five_slides"]))
        assert "several tasks" in caplog.text
