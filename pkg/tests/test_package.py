"""Reading and writing .pptx packages."""
from __future__ import annotations

import io
import zipfile

import pytest
from pptx import Presentation

from deckhand.errors import DeckIOError, MalformedPackage, NotAZip
from deckhand.model import LINE_BREAK, Fill, Run
from deckhand.package import can_hold_notes, deck_to_bytes, has_notes_master, layout_names, load_deck, read_deck, save_deck
from deckhand.slidejson import deck_to_json


def _parts(data: bytes) -> dict[str, bytes]:
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        return {n: zf.read(n) for n in zf.namelist()}


class TestRoundTrip:
    def test_every_fixture_round_trips(self, corpus):
        for name, path in corpus.items():
            deck = load_deck(path)
            again = read_deck(deck_to_bytes(deck))
            assert again == deck, name
            assert again.opaque_parts == deck.opaque_parts, name

    def test_unchanged_save_is_byte_identical_per_part(self, corpus):
        for name, path in corpus.items():
            assert _parts(deck_to_bytes(load_deck(path))) == _parts(path.read_bytes()), name

    def test_second_save_is_stable(self, corpus):
        deck = load_deck(corpus["mixed_runs"])
        deck.slides[0].shapes[0].text_frame.paragraphs[0].runs[0].text = "Changed "
        once = deck_to_bytes(deck)
        assert deck_to_bytes(read_deck(once)) == once


class TestReadsWhatPythonPptxWrote:
    """python-pptx authored the fixtures, so their content is known."""

    def test_mixed_run_formats(self, corpus):
        runs = load_deck(corpus["mixed_runs"]).slides[0].shapes[0].text_frame.paragraphs[0].runs
        assert [r.text for r in runs] == ["Plain ", "bold red", " italic", " under"]
        assert runs[1].format.bold is True and runs[1].format.color_rgb == 0xFF0000
        assert runs[2].format.italic is True and runs[2].format.size_points == 24
        assert runs[3].format.underline is True and runs[3].format.font_name == "Arial"

    def test_notes(self, corpus):
        deck = load_deck(corpus["notes"])
        assert [s.notes_text for s in deck.slides] == ["Speaker note 1\nsecond line", "", "Speaker note 3\nsecond line"]

    def test_picture_and_chart_kinds(self, corpus):
        pic = load_deck(corpus["picture"]).slides[0].shapes[1]
        assert pic.kind == "picture" and pic.image_ref == "ppt/media/image1.png"
        assert (pic.box.left_emu, pic.box.width_emu) == (914400, 1828800)
        assert load_deck(corpus["chart"]).slides[0].shapes[1].kind == "chart"

    def test_table_cells_are_paragraphs(self, corpus):
        shape = load_deck(corpus["table"]).slides[0].shapes[0]
        assert shape.kind == "table"
        assert [p.text for p in shape.text_frame.paragraphs] == [f"r{r}c{c}" for r in range(2) for c in range(3)]

    def test_background(self, corpus):
        deck = load_deck(corpus["backgrounds"])
        assert deck.slides[0].background == Fill("solid", 0x112233)

    def test_line_break_is_its_own_run(self, corpus):
        para = load_deck(corpus["multilingual"]).slides[0].shapes[1].text_frame.paragraphs[1]
        assert [r.text for r in para.runs] == ["line one", LINE_BREAK, "line two"]

    def test_layouts(self, corpus):
        assert "Title Only" in layout_names(load_deck(corpus["five_slides"]))


class TestWrite:
    def test_edit_is_readable_by_python_pptx(self, corpus, tmp_path):
        deck = load_deck(corpus["mixed_runs"])
        para = deck.slides[0].shapes[0].text_frame.paragraphs[0]
        para.runs[1].text = "BOLD"
        para.runs.append(Run("!"))
        out = tmp_path / "out.pptx"
        save_deck(deck, out)
        prs = Presentation(str(out))
        texts = [r.text for r in prs.slides[0].shapes[0].text_frame.paragraphs[0].runs]
        assert texts == ["Plain ", "BOLD", " italic", " under", "!"]
        assert prs.slides[0].shapes[0].text_frame.paragraphs[0].runs[1].font.bold is True

    def test_notes_master_is_synthesized(self, corpus, tmp_path):
        deck = load_deck(corpus["five_slides"])
        assert not has_notes_master(deck) and can_hold_notes(deck)
        deck.slides[0].notes_text = "hello notes"
        out = tmp_path / "n.pptx"
        save_deck(deck, out)
        prs = Presentation(str(out))
        assert prs.slides[0].notes_slide.notes_text_frame.text == "hello notes"
        assert has_notes_master(load_deck(out))

    def test_unwritable_target(self, corpus, tmp_path):
        with pytest.raises(DeckIOError):
            save_deck(load_deck(corpus["one_textbox"]), tmp_path / "missing" / "dir" / "x.pptx")


class TestBadInput:
    def test_missing_file(self, tmp_path):
        with pytest.raises(DeckIOError):
            load_deck(tmp_path / "nope.pptx")

    def test_not_a_zip(self, tmp_path):
        p = tmp_path / "x.pptx"
        p.write_bytes(b"plain text")
        with pytest.raises(NotAZip):
            load_deck(p)

    def test_zip_without_content_types(self):
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            zf.writestr("hello.txt", "hi")
        with pytest.raises(MalformedPackage):
            read_deck(buf.getvalue())

    def test_json_view_of_round_trip(self, corpus):
        deck = load_deck(corpus["big_deck"])
        assert deck_to_json(read_deck(deck_to_bytes(deck))) == deck_to_json(deck)
