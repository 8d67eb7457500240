"""Structured JSON view of slides, exchanged with the LLM stages.

Keys are emitted in a fixed order so the same slide always produces the
same text. Colors travel as six uppercase hex digits.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from .errors import SlideOutOfRange
from .model import (
    ALIGNMENTS,
    FILL_KINDS,
    SHAPE_KINDS,
    TEXT_KINDS,
    Box,
    Deck,
    Fill,
    Paragraph,
    Run,
    RunFormat,
    Shape,
    Slide,
    TextFrame,
    paragraph_text,
)

SlideJson = dict[str, Any]

FORMAT_KEYS = ("font_name", "size_points", "bold", "italic", "underline", "color_rgb")
BOX_KEYS = ("left_emu", "top_emu", "width_emu", "height_emu")


def color_hex(rgb: int) -> str:
    return f"{rgb:06X}"


def parse_color_hex(text: Any, where: str = "color_rgb") -> int:
    if not isinstance(text, str) or len(text) != 6:
        raise ValueError(f"{where}: expected 6 hex digits, got {text!r}")
    try:
        return int(text, 16)
    except ValueError:
        raise ValueError(f"{where}: expected 6 hex digits, got {text!r}") from None


def _number(x: float) -> float | int:
    return int(x) if float(x).is_integer() else x


def fill_to_json(fill: Fill) -> dict:
    out: dict[str, Any] = {"kind": fill.kind}
    if fill.color_rgb is not None:
        out["color_rgb"] = color_hex(fill.color_rgb)
    return out


def run_to_json(run: Run) -> dict:
    out: dict[str, Any] = {"text": run.text}
    fmt = run.format
    if fmt.font_name is not None:
        out["font_name"] = fmt.font_name
    if fmt.size_points is not None:
        out["size_points"] = _number(fmt.size_points)
    for key in ("bold", "italic", "underline"):
        if getattr(fmt, key) is not None:
            out[key] = getattr(fmt, key)
    if fmt.color_rgb is not None:
        out["color_rgb"] = color_hex(fmt.color_rgb)
    return out


def paragraph_to_json(p: Paragraph) -> dict:
    out: dict[str, Any] = {}
    if p.alignment is not None:
        out["alignment"] = p.alignment
    if p.bullet is not None:
        out["bullet"] = p.bullet
    out["runs"] = [run_to_json(r) for r in p.runs]
    return out


def shape_to_json(shape: Shape) -> dict:
    out: dict[str, Any] = {
        "id": shape.id,
        "name": shape.name,
        "type": shape.kind,
        "position": {k: getattr(shape.box, k) for k in BOX_KEYS},
    }
    if shape.fill is not None:
        out["fill"] = fill_to_json(shape.fill)
    if shape.image_ref is not None:
        out["image_ref"] = shape.image_ref
    if shape.text_frame is not None:
        out["paragraphs"] = [paragraph_to_json(p) for p in shape.text_frame.paragraphs]
    return out


def slide_json(slide: Slide) -> SlideJson:
    return {
        "slide_index": slide.index,
        "layout_name": slide.layout_name,
        "background": fill_to_json(slide.background),
        "transition": slide.transition,
        "notes": slide.notes_text,
        "objects": [shape_to_json(s) for s in slide.shapes],
    }


def slide_to_json(deck: Deck, index: int) -> SlideJson:
    if not 1 <= index <= len(deck.slides):
        raise SlideOutOfRange(f"slide {index} not in 1..{len(deck.slides)}")
    return slide_json(deck.slides[index - 1])


def deck_to_json(deck: Deck) -> list[SlideJson]:
    return [slide_json(s) for s in deck.slides]


def dumps(obj: Any, pretty: bool = True) -> str:
    """Deterministic JSON text (insertion order, UTF-8 characters kept)."""
    if pretty:
        return json.dumps(obj, ensure_ascii=False, indent=2)
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


# -- validation and reconstruction -----------------------------------------


class SchemaError(ValueError):
    pass


def _expect(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise SchemaError(f"{where}: {message}")


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _fill_from_json(obj: Any, where: str) -> Fill:
    _expect(isinstance(obj, dict), where, "expected an object")
    kind = obj.get("kind")
    _expect(kind in FILL_KINDS, where, f"kind must be one of {FILL_KINDS}")
    color = obj.get("color_rgb")
    rgb = None
    if color is not None:
        try:
            rgb = parse_color_hex(color, where + "/color_rgb")
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    _expect((kind == "solid") == (rgb is not None), where, "color_rgb required exactly for solid fills")
    return Fill(kind, rgb)


def _run_from_json(obj: Any, where: str) -> Run:
    _expect(isinstance(obj, dict), where, "expected an object")
    _expect(isinstance(obj.get("text"), str), where, "text must be a string")
    unknown = set(obj) - {"text", *FORMAT_KEYS}
    _expect(not unknown, where, f"unknown keys {sorted(unknown)}")
    fmt = RunFormat()
    if obj.get("font_name") is not None:
        _expect(isinstance(obj["font_name"], str), where, "font_name must be a string")
        fmt.font_name = obj["font_name"]
    if obj.get("size_points") is not None:
        size = obj["size_points"]
        _expect(isinstance(size, (int, float)) and not isinstance(size, bool) and size > 0,
                where, "size_points must be a positive number")
        fmt.size_points = float(size)
    for key in ("bold", "italic", "underline"):
        if obj.get(key) is not None:
            _expect(isinstance(obj[key], bool), where, f"{key} must be boolean")
            setattr(fmt, key, obj[key])
    if obj.get("color_rgb") is not None:
        try:
            fmt.color_rgb = parse_color_hex(obj["color_rgb"], where + "/color_rgb")
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    return Run(obj["text"], fmt)


def _paragraph_from_json(obj: Any, where: str) -> Paragraph:
    _expect(isinstance(obj, dict), where, "expected an object")
    _expect(isinstance(obj.get("runs"), list), where, "runs must be an array")
    alignment = obj.get("alignment")
    _expect(alignment is None or alignment in ALIGNMENTS, where, f"alignment must be one of {ALIGNMENTS}")
    bullet = obj.get("bullet")
    _expect(bullet is None or isinstance(bullet, bool), where, "bullet must be boolean")
    runs = [_run_from_json(r, f"{where}/runs/{i}") for i, r in enumerate(obj["runs"])]
    return Paragraph(runs, alignment, bullet)


def _shape_from_json(obj: Any, where: str) -> Shape:
    _expect(isinstance(obj, dict), where, "expected an object")
    for key in ("id", "name"):
        _expect(isinstance(obj.get(key), str), where, f"{key} must be a string")
    kind = obj.get("type")
    _expect(kind in SHAPE_KINDS, where, f"type must be one of {SHAPE_KINDS}")
    pos = obj.get("position")
    _expect(isinstance(pos, dict) and all(_is_int(pos.get(k)) for k in BOX_KEYS),
            where, "position needs integer left_emu/top_emu/width_emu/height_emu")
    _expect(pos["width_emu"] >= 0 and pos["height_emu"] >= 0, where, "negative extent")
    fill = _fill_from_json(obj["fill"], where + "/fill") if obj.get("fill") is not None else None
    image_ref = obj.get("image_ref")
    _expect(image_ref is None or isinstance(image_ref, str), where, "image_ref must be a string")
    _expect(kind != "picture" or image_ref is not None, where, "picture needs image_ref")
    frame = None
    if obj.get("paragraphs") is not None:
        _expect(isinstance(obj["paragraphs"], list), where, "paragraphs must be an array")
        _expect(kind in TEXT_KINDS, where, f"{kind} objects cannot carry paragraphs")
        frame = TextFrame([_paragraph_from_json(p, f"{where}/paragraphs/{i}")
                           for i, p in enumerate(obj["paragraphs"])])
    return Shape(obj["id"], obj["name"], kind, Box(*(pos[k] for k in BOX_KEYS)), fill, frame, image_ref)


def validate_slide_json(obj: Any) -> None:
    """Raise SchemaError unless ``obj`` is a well-formed SlideJson document."""
    json_to_slide(obj)


def json_to_slide(obj: Any) -> Slide:
    """Rebuild a model slide from SlideJson (origins are not restored)."""
    _expect(isinstance(obj, dict), "", "slide must be a JSON object")
    _expect(_is_int(obj.get("slide_index")) and obj["slide_index"] >= 1, "/slide_index",
            "must be a positive integer")
    _expect(isinstance(obj.get("layout_name"), str), "/layout_name", "must be a string")
    _expect("background" in obj, "/background", "missing")
    background = _fill_from_json(obj["background"], "/background")
    transition = obj.get("transition")
    _expect(transition is None or isinstance(transition, str), "/transition", "must be string or null")
    _expect(isinstance(obj.get("notes"), str), "/notes", "must be a string")
    _expect(isinstance(obj.get("objects"), list), "/objects", "must be an array")
    shapes = [_shape_from_json(o, f"/objects/{i}") for i, o in enumerate(obj["objects"])]
    ids = [s.id for s in shapes]
    _expect(len(ids) == len(set(ids)), "/objects", "object ids must be unique")
    return Slide(obj["slide_index"], obj["layout_name"], background, transition, shapes, obj["notes"])


# -- summary ----------------------------------------------------------------


@dataclass
class SlideSummary:
    index: int
    title_text: str
    shape_count: int
    shape_kinds: dict[str, int] = field(default_factory=dict)


@dataclass
class DeckSummary:
    slide_count: int
    slides: list[SlideSummary] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "slide_count": self.slide_count,
            "slides": [
                {"index": s.index, "title_text": s.title_text, "shape_count": s.shape_count,
                 "shape_kinds": dict(s.shape_kinds)}
                for s in self.slides
            ],
        }


def _title_text(slide: Slide) -> str:
    for shape in slide.shapes:
        if shape.placeholder in ("title", "ctrTitle") and shape.text_frame and shape.text_frame.paragraphs:
            return paragraph_text(shape.text_frame.paragraphs[0])
    for shape in slide.shapes:
        if shape.kind in ("placeholder", "textbox") and shape.text_frame and shape.text_frame.paragraphs:
            return paragraph_text(shape.text_frame.paragraphs[0])
    return ""


def deck_summary(deck: Deck) -> DeckSummary:
    slides = []
    for slide in deck.slides:
        kinds = Counter(s.kind for s in slide.shapes)
        slides.append(SlideSummary(
            index=slide.index,
            title_text=_title_text(slide),
            shape_count=len(slide.shapes),
            shape_kinds={k: kinds[k] for k in SHAPE_KINDS if kinds[k]},
        ))
    return DeckSummary(len(deck.slides), slides)
