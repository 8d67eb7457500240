"""Code generation with self-reflection."""
from __future__ import annotations

import copy
import json

import pytest

from deckhand.errors import BadResponse
from deckhand.executor import build_codegen_prompt, post_check, run_direct, run_with_reflection
from deckhand.package import load_deck
from deckhand.planner import Task
from deckhand.provider import mock_client
from deckhand.script import GRAMMAR_TEXT, apply_script, script_from_obj
from deckhand.slidejson import deck_to_json, slide_to_json

GOOD = json.dumps({"ops": [{"set_run_text": {"slide": 1, "shape_selector": "2", "paragraph_index": 0,
                                             "run_index": 0, "text": "Hello world"}}]})
BAD_PARSE = "I would change the text."
BAD_VALIDATE = json.dumps({"ops": [{"delete_slide": {"slide": 4}}]})
WRONG_TEXT = json.dumps({"ops": [{"set_run_text": {"slide": 1, "shape_selector": "2", "paragraph_index": 0,
                                                   "run_index": 0, "text": "Goodbye"}}]})


@pytest.fixture
def case(corpus):
    deck = load_deck(corpus["one_textbox"])
    before = slide_to_json(deck, 1)
    after = copy.deepcopy(before)
    after["objects"][0]["paragraphs"][0]["runs"][0]["text"] = "Hello world"
    return Task(1, "extend the greeting"), before, after, deck


class TestReflection:
    def test_second_attempt_succeeds(self, case):
        task, before, after, deck = case
        client = mock_client([BAD_PARSE, GOOD])
        new, result = run_with_reflection(task, before, after, deck, client, 3)
        assert result.status == "success"
        assert result.trace.outcomes == ["parse_error", "success"]
        assert new.slides[0].shapes[0].text_frame.text == "Hello world"
        assert deck.slides[0].shapes[0].text_frame.text == "Hello"

    def test_feedback_accumulates(self, case):
        task, before, after, deck = case
        client = mock_client([BAD_PARSE, BAD_VALIDATE, GOOD])
        run_with_reflection(task, before, after, deck, client, 3)
        provider = client.provider_for("mock")
        third = provider.requests[2].user_text
        assert BAD_PARSE in third and BAD_VALIDATE in third
        assert "Attempt 1 produced:" in third and "Attempt 2 produced:" in third
        assert provider.requests[0].user_text.count(GRAMMAR_TEXT) == 1

    def test_always_invalid_exhausts(self, case):
        task, before, after, deck = case
        original = deck_to_json(deck)
        client = mock_client([BAD_VALIDATE] * 5)
        new, result = run_with_reflection(task, before, after, deck, client, 3)
        assert result.status == "failed" and len(result.trace) == 3
        assert result.trace.outcomes == ["validation_error"] * 3
        assert new is deck and deck_to_json(deck) == original
        assert client.provider_for("mock").remaining == 2

    def test_post_check_catches_wrong_text(self, case):
        task, before, after, deck = case
        client = mock_client([WRONG_TEXT, GOOD])
        _, result = run_with_reflection(task, before, after, deck, client, 3)
        assert result.trace.outcomes == ["post_check_error", "success"]
        assert "Hello world" in result.trace.attempts[0].error_text

    def test_refusal_stops(self, case):
        task, before, after, deck = case
        client = mock_client(['{"ops": [{"refuse": {"reason": "cannot"}}]}', GOOD])
        new, result = run_with_reflection(task, before, after, deck, client, 3)
        assert result.status == "refused" and result.reason == "cannot" and new is deck

    def test_provider_error_propagates(self, case):
        task, before, after, deck = case
        with pytest.raises(BadResponse):
            run_with_reflection(task, before, after, deck, mock_client([]), 3)

    def test_attempts_must_be_positive(self, case):
        task, before, after, deck = case
        with pytest.raises(ValueError):
            run_with_reflection(task, before, after, deck, mock_client([GOOD]), 0)


def test_codegen_prompt(case):
    task, before, after, _ = case
    prompt = build_codegen_prompt(before, after, task)
    assert '"text": "Hello world"' in prompt and '"text": "Hello"' in prompt
    assert "page number, starting at 1): 1" in prompt


def test_post_check_structural_scope(corpus):
    deck = load_deck(corpus["five_slides"])
    before = slide_to_json(deck, 5)
    after = copy.deepcopy(before)
    after["objects"][0]["paragraphs"][0]["runs"][0]["text"] = "Intro"
    script = script_from_obj({"ops": [{"duplicate_slide": {"slide": 1, "insert_after": 5}},
                                      {"delete_slide": {"slide": 5}}]})
    new, _ = apply_script(script, deck)
    # the new text lives on another slide; structural scripts are checked deck-wide
    assert post_check(before, after, script, new, 5) is None


def test_direct_single_attempt(corpus):
    deck = load_deck(corpus["one_textbox"])
    new, result = run_direct("Say Hello world", deck, mock_client([BAD_PARSE, GOOD]))
    assert result.status == "failed" and len(result.trace) == 1 and new is deck
    new, result = run_direct("Say Hello world", deck, mock_client([GOOD]))
    assert result.status == "success" and new.slides[0].shapes[0].text_frame.text == "Hello world"
