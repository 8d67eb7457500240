"""Hand-built PPTX fixtures.

python-pptx authors the files so their contents are known by
construction and independent of deckhand's writer.
"""
from __future__ import annotations

import io
import struct
import zlib
from pathlib import Path

from pptx import Presentation
from pptx.chart.data import CategoryChartData
from pptx.dml.color import RGBColor
from pptx.enum.chart import XL_CHART_TYPE
from pptx.enum.shapes import MSO_SHAPE
from pptx.enum.text import PP_ALIGN
from pptx.util import Emu, Pt

BLANK, TITLE_ONLY, TITLE_AND_CONTENT, TITLE_SLIDE = 6, 5, 1, 0


def png_bytes(width: int = 4, height: int = 3, rgb=(200, 30, 30)) -> bytes:
    raw = b"".join(b"\x00" + bytes(rgb) * width for _ in range(height))

    def chunk(tag: bytes, data: bytes) -> bytes:
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data))

    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b"")


def _textbox(slide, text, left=914400, top=914400, width=3 * 914400, height=914400, name=None):
    box = slide.shapes.add_textbox(Emu(left), Emu(top), Emu(width), Emu(height))
    box.text_frame.text = text
    if name:
        box.name = name
    return box


def one_textbox(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[BLANK])
    _textbox(slide, "Hello")
    prs.save(path)
    return path


def five_slides(path: Path) -> Path:
    prs = Presentation()
    titles = ["Intro", "Background", "Method", "Results", "Summary"]
    for t in titles:
        slide = prs.slides.add_slide(prs.slide_layouts[TITLE_ONLY])
        slide.shapes.title.text = t
    prs.save(path)
    return path


def mixed_runs(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[BLANK])
    box = _textbox(slide, "", name="Styled")
    p = box.text_frame.paragraphs[0]
    specs = [
        ("Plain ", {}),
        ("bold red", {"bold": True, "color": RGBColor(0xFF, 0, 0)}),
        (" italic", {"italic": True, "size": Pt(24)}),
        (" under", {"underline": True, "name": "Arial"}),
    ]
    for text, fmt in specs:
        r = p.add_run()
        r.text = text
        if fmt.get("bold"):
            r.font.bold = True
        if "color" in fmt:
            r.font.color.rgb = fmt["color"]
        if fmt.get("italic"):
            r.font.italic = True
        if "size" in fmt:
            r.font.size = fmt["size"]
        if fmt.get("underline"):
            r.font.underline = True
        if "name" in fmt:
            r.font.name = fmt["name"]
    p.alignment = PP_ALIGN.CENTER
    p2 = box.text_frame.add_paragraph()
    r = p2.add_run()
    r.text = "second line"
    r.font.bold = False
    prs.save(path)
    return path


def picture(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[TITLE_ONLY])
    slide.shapes.title.text = "Photo"
    slide.shapes.add_picture(io.BytesIO(png_bytes()), Emu(914400), Emu(1828800), Emu(1828800), Emu(1371600))
    prs.save(path)
    return path


def notes(path: Path) -> Path:
    prs = Presentation()
    for i in range(3):
        slide = prs.slides.add_slide(prs.slide_layouts[TITLE_ONLY])
        slide.shapes.title.text = f"Slide {i + 1}"
        if i != 1:
            slide.notes_slide.notes_text_frame.text = f"Speaker note {i + 1}\nsecond line"
    prs.save(path)
    return path


def table(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[BLANK])
    shape = slide.shapes.add_table(2, 3, Emu(914400), Emu(914400), Emu(5486400), Emu(1371600))
    for r in range(2):
        for c in range(3):
            shape.table.cell(r, c).text = f"r{r}c{c}"
    prs.save(path)
    return path


def chart(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[TITLE_ONLY])
    slide.shapes.title.text = "Sales"
    data = CategoryChartData()
    data.categories = ["Q1", "Q2", "Q3"]
    data.add_series("2024", (1.0, 2.5, 3.2))
    slide.shapes.add_chart(XL_CHART_TYPE.COLUMN_CLUSTERED, Emu(914400), Emu(1828800),
                           Emu(5486400), Emu(3657600), data)
    prs.save(path)
    return path


def group(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[BLANK])
    grp = slide.shapes.add_group_shape()
    grp.shapes.add_shape(MSO_SHAPE.OVAL, Emu(0), Emu(0), Emu(914400), Emu(914400))
    grp.shapes.add_shape(MSO_SHAPE.RECTANGLE, Emu(914400), Emu(0), Emu(914400), Emu(914400))
    _textbox(slide, "outside")
    prs.save(path)
    return path


def backgrounds(path: Path) -> Path:
    prs = Presentation()
    for rgb in (RGBColor(0x11, 0x22, 0x33), None):
        slide = prs.slides.add_slide(prs.slide_layouts[BLANK])
        if rgb is not None:
            fill = slide.background.fill
            fill.solid()
            fill.fore_color.rgb = rgb
        _textbox(slide, "bg")
    prs.save(path)
    return path


def shapes_and_bullets(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[TITLE_AND_CONTENT])
    slide.shapes.title.text = "Agenda"
    body = slide.placeholders[1].text_frame
    body.text = "First point"
    for t in ("Second point", "Third point"):
        body.add_paragraph().text = t
    shape = slide.shapes.add_shape(MSO_SHAPE.ROUNDED_RECTANGLE, Emu(457200), Emu(4572000), Emu(2743200), Emu(914400))
    shape.fill.solid()
    shape.fill.fore_color.rgb = RGBColor(0x00, 0x80, 0x40)
    shape.text_frame.text = "Callout"
    shape.text_frame.paragraphs[0].alignment = PP_ALIGN.RIGHT
    prs.save(path)
    return path


def multilingual(path: Path) -> Path:
    prs = Presentation()
    slide = prs.slides.add_slide(prs.slide_layouts[TITLE_ONLY])
    slide.shapes.title.text = "딥러닝 개요"
    box = _textbox(slide, "")
    p = box.text_frame.paragraphs[0]
    for t in ("深度", "学习"):
        p.add_run().text = t
    box.text_frame.add_paragraph().text = "line one\vline two"
    prs.save(path)
    return path


def big_deck(path: Path, slides: int = 8) -> Path:
    prs = Presentation()
    for i in range(slides):
        slide = prs.slides.add_slide(prs.slide_layouts[TITLE_AND_CONTENT])
        slide.shapes.title.text = f"Topic {i + 1}"
        slide.placeholders[1].text_frame.text = f"Body text {i + 1}"
        if i % 2 == 0:
            slide.notes_slide.notes_text_frame.text = f"note {i + 1}"
        if i == 3:
            slide.shapes.add_picture(io.BytesIO(png_bytes(rgb=(10, 200, 10))), Emu(0), Emu(0))
    prs.save(path)
    return path


CORPUS = {
    "one_textbox": one_textbox,
    "five_slides": five_slides,
    "mixed_runs": mixed_runs,
    "picture": picture,
    "notes": notes,
    "table": table,
    "chart": chart,
    "group": group,
    "backgrounds": backgrounds,
    "shapes_and_bullets": shapes_and_bullets,
    "multilingual": multilingual,
    "big_deck": big_deck,
}


def build_corpus(directory: Path) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    return {name: fn(directory / f"{name}.pptx") for name, fn in CORPUS.items()}
