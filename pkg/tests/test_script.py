"""The EditScript language: parsing, validation and application."""
from __future__ import annotations

import random

import pytest

import script_oracle as so
from deckhand.errors import (
    ApplyError,
    InvalidColor,
    InvalidGeometry,
    RunOutOfRange,
    ScriptParseError,
    ShapeNotFound,
    SlideOutOfRange,
)
from deckhand.model import LINE_BREAK
from deckhand.package import deck_to_bytes, load_deck, read_deck
from deckhand.script import GRAMMAR_TEXT, apply_script, next_shape_id, parse_edit_script, script_from_obj
from deckhand.slidejson import deck_to_json


def run(deck, *ops):
    return apply_script(script_from_obj({"ops": list(ops)}), deck)


def text_op(slide=1, shape="2", p=0, r=0, text="x"):
    return {"set_run_text": {"slide": slide, "shape_selector": shape, "paragraph_index": p,
                             "run_index": r, "text": text}}


class TestParse:
    def test_fenced_with_trailing_comma(self):
        script = parse_edit_script('```json\n{"ops": [{"delete_slide": {"slide": 2}},]}\n```')
        assert [op.name for op in script.ops] == ["delete_slide"]
        assert script.ops[0].args == {"slide": 2}

    def test_hex_string_color_names_the_field(self):
        with pytest.raises(ScriptParseError) as info:
            parse_edit_script('{"ops": [{"set_run_format": {"slide": 1, "shape_selector": "2", '
                              '"paragraph_index": 0, "run_index": 0, "format": {"color_rgb": "FF0000"}}}]}')
        assert info.value.field == "ops[0].set_run_format.format.color_rgb"

    @pytest.mark.parametrize("text", [
        "nope",
        '{"ops": {}}',
        '{"ops": [{"explode": {}}]}',
        '{"ops": [{"delete_slide": {"slide": 1}, "move_slide": {}}]}',
        '{"ops": [{"delete_slide": {}}]}',
        '{"ops": [{"delete_slide": {"slide": "1"}}]}',
        '{"ops": [{"delete_slide": {"slide": 1, "extra": 2}}]}',
        '{"ops": [{"set_fill": {"slide": 1, "shape_selector": "2", "fill": {"kind": "gradient"}}}]}',
        '{"ops": [{"refuse": {"reason": "x"}}, {"delete_slide": {"slide": 1}}]}',
    ])
    def test_rejects(self, text):
        with pytest.raises(ScriptParseError):
            parse_edit_script(text)

    def test_round_trip(self):
        script = parse_edit_script('{"ops": [{"move_slide": {"from_index": 1, "to_index": 2}}]}')
        assert parse_edit_script(script.to_json()) == script

    def test_grammar_lists_every_op(self):
        for name in ("set_run_text", "set_run_format", "set_shape_box", "set_fill", "set_notes", "add_textbox",
                     "delete_shape", "add_slide", "delete_slide", "duplicate_slide", "move_slide",
                     "set_slide_background", "refuse"):
            assert f"  {name}:" in GRAMMAR_TEXT


class TestValidate:
    def test_slide_out_of_range(self, corpus):
        with pytest.raises(SlideOutOfRange) as info:
            run(load_deck(corpus["one_textbox"]), text_op(), text_op(slide=3))
        assert info.value.op_index == 1

    def test_unknown_shape(self, corpus):
        with pytest.raises(ShapeNotFound):
            run(load_deck(corpus["one_textbox"]), text_op(shape="99"))

    def test_run_out_of_range(self, corpus):
        with pytest.raises(RunOutOfRange):
            run(load_deck(corpus["one_textbox"]), text_op(r=5))

    def test_color_too_large(self, corpus):
        op = {"set_run_format": {"slide": 1, "shape_selector": "2", "paragraph_index": 0, "run_index": 0,
                                 "format": {"color_rgb": 0x1000000}}}
        with pytest.raises(InvalidColor):
            run(load_deck(corpus["one_textbox"]), op)

    def test_negative_size(self, corpus):
        op = {"set_shape_box": {"slide": 1, "shape_selector": "2", "box": {"width_emu": -1}}}
        with pytest.raises(InvalidGeometry):
            run(load_deck(corpus["one_textbox"]), op)

    def test_later_ops_see_earlier_structure(self, corpus):
        deck = load_deck(corpus["five_slides"])
        out, report = run(deck, {"duplicate_slide": {"slide": 5, "insert_after": 5}}, text_op(slide=6, text="Copy"))
        assert out.slide_count == 6 and report.applied_ops == 2


class TestApply:
    def test_input_deck_untouched(self, corpus):
        deck = load_deck(corpus["mixed_runs"])
        before = deck_to_json(deck)
        out, _ = run(deck, text_op(text="New"))
        assert deck_to_json(deck) == before
        assert out.slides[0].shapes[0].text_frame.paragraphs[0].runs[0].text == "New"

    def test_append_run_copies_format(self, corpus):
        out, _ = run(load_deck(corpus["mixed_runs"]), text_op(r=4, text="!"))
        runs = out.slides[0].shapes[0].text_frame.paragraphs[0].runs
        assert runs[4].text == "!" and runs[4].format == runs[3].format

    def test_append_paragraph(self, corpus):
        out, _ = run(load_deck(corpus["one_textbox"]), text_op(p=1, r=0, text="two"))
        assert [p.text for p in out.slides[0].shapes[0].text_frame.paragraphs] == ["Hello", "two"]

    def test_newlines_become_line_breaks(self, corpus):
        out, _ = run(load_deck(corpus["one_textbox"]), text_op(text="a\nb"))
        runs = out.slides[0].shapes[0].text_frame.paragraphs[0].runs
        assert [r.text for r in runs] == ["a", LINE_BREAK, "b"]
        assert deck_to_json(read_deck(deck_to_bytes(out))) == deck_to_json(out)

    def test_new_textbox_id(self, corpus):
        op = {"add_textbox": {"slide": 1, "name": "Note", "paragraphs": [{"runs": [{"text": "hi", "bold": True}]}],
                              "box": {"left_emu": 0, "top_emu": 0, "width_emu": 100, "height_emu": 100}}}
        out, _ = run(load_deck(corpus["one_textbox"]), op)
        assert out.slides[0].shapes[-1].id == "3"
        again = read_deck(deck_to_bytes(out))
        assert again.slides[0].shapes[-1].text_frame.paragraphs[0].runs[0].format.bold is True

    def test_next_shape_id(self):
        assert next_shape_id([]) == "2"
        assert next_shape_id(["2", "7", "x"]) == "8"

    def test_add_slide_from_layout(self, corpus):
        out, _ = run(load_deck(corpus["five_slides"]), {"add_slide": {"after_index": 0, "layout_name": "Title Only"}})
        assert out.slide_count == 6 and out.slides[0].layout_name == "Title Only"
        assert deck_to_json(read_deck(deck_to_bytes(out))) == deck_to_json(out)

    def test_add_slide_unknown_layout(self, corpus):
        with pytest.raises(ApplyError) as info:
            run(load_deck(corpus["five_slides"]), {"add_slide": {"after_index": 0, "layout_name": "Nope"}})
        assert "Title Only" in str(info.value)

    def test_fill_on_table_rejected(self, corpus):
        op = {"set_fill": {"slide": 1, "shape_selector": "2", "fill": {"kind": "none"}}}
        with pytest.raises(ApplyError):
            run(load_deck(corpus["table"]), op)

    def test_refusal(self, corpus):
        deck = load_deck(corpus["one_textbox"])
        out, report = run(deck, {"refuse": {"reason": "no video here"}})
        assert out is deck and report.status == "refused" and report.reason == "no video here"

    def test_notes_on_deck_without_notes_master(self, corpus):
        out, _ = run(load_deck(corpus["five_slides"]), {"set_notes": {"slide": 2, "text": "say this"}})
        assert read_deck(deck_to_bytes(out)).slides[1].notes_text == "say this"


def test_random_scripts_match_oracle(corpus):
    names = ["mixed_runs", "five_slides", "notes", "backgrounds", "shapes_and_bullets", "multilingual"]
    decks = {n: load_deck(corpus[n]) for n in names}
    for seed in range(100):
        rng = random.Random(seed)
        deck = decks[rng.choice(names)]
        before = deck_to_json(deck)
        ops, expected = so.random_script(rng, before, rng.randint(1, 6))
        out, _ = apply_script(script_from_obj({"ops": ops}), deck)
        assert deck_to_json(out) == expected, seed
        assert deck_to_json(deck) == before, seed


def test_failing_op_changes_nothing(corpus):
    deck = load_deck(corpus["five_slides"])
    before = deck_to_json(deck)
    for seed in range(50):
        rng = random.Random(seed)
        ops, _ = so.random_script(rng, before, rng.randint(1, 4))
        ops.append(so.break_op(rng, ops[-1], before))
        with pytest.raises(SlideOutOfRange):
            apply_script(script_from_obj({"ops": ops}), deck)
        assert deck_to_json(deck) == before
