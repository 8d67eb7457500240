"""EditScript: the command language the code-generation stage emits.

A script is ``{"ops": [...]}`` where every op is a single-key object
naming the variant, e.g. ``{"set_run_text": {...}}``. Slide indices are
1-based; paragraph and run indices are 0-based positions inside a shape.
Colors are integers ``0xRRGGBB``. Geometry is in EMU.

Scripts are checked in three steps. Parsing fixes the types. Validation
replays the ops against a lightweight shadow of the deck so that every
reference is checked against the state it will meet. Application runs
the ops on a copy of the deck, so the caller's deck is never touched.
"""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import package
from .errors import (
    Ambiguous,
    ApplyError,
    InvalidColor,
    InvalidGeometry,
    NotFound,
    RunOutOfRange,
    ScriptParseError,
    ShapeNotFound,
    SlideOutOfRange,
)
from .llmjson import loads_lenient
from .model import (
    ALIGNMENTS,
    LINE_BREAK,
    MAX_RGB,
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
    find_shape,
)
from .ooxml import can_set_box, can_set_fill

BOX_FIELDS = ("left_emu", "top_emu", "width_emu", "height_emu")
FORMAT_FIELDS = ("font_name", "size_points", "bold", "italic", "underline", "color_rgb")
EDITABLE_FILLS = ("none", "solid")

# payload field -> checker name; see _CHECKS
GRAMMAR: dict[str, dict[str, str]] = {
    "set_run_text": {"slide": "int", "shape_selector": "str", "paragraph_index": "int",
                     "run_index": "int", "text": "str"},
    "set_run_format": {"slide": "int", "shape_selector": "str", "paragraph_index": "int",
                       "run_index": "int", "format": "format"},
    "set_shape_box": {"slide": "int", "shape_selector": "str", "box": "partial_box"},
    "set_fill": {"slide": "int", "shape_selector": "str", "fill": "fill"},
    "set_notes": {"slide": "int", "text": "str"},
    "add_textbox": {"slide": "int", "name": "str", "box": "box", "paragraphs": "paragraphs"},
    "delete_shape": {"slide": "int", "shape_selector": "str"},
    "add_slide": {"after_index": "int", "layout_name": "str"},
    "delete_slide": {"slide": "int"},
    "duplicate_slide": {"slide": "int", "insert_after": "int"},
    "move_slide": {"from_index": "int", "to_index": "int"},
    "set_slide_background": {"slide": "int", "fill": "fill"},
    "refuse": {"reason": "str"},
}

GRAMMAR_TEXT = """EditScript grammar (JSON):
{"ops": [<op>, ...]}
Each <op> is an object with exactly one key, the op name, whose value holds the fields below.
Slide numbers start at 1. paragraph_index and run_index start at 0.
Colors are integers 0xRRGGBB written in decimal (red = 16711680). Positions and sizes are integers in EMU (914400 per inch).
shape_selector is an object id, or an object name when the name is unique on the slide.
  set_run_text: {"slide", "shape_selector", "paragraph_index", "run_index", "text"}  (run_index equal to the run count appends a run)
  set_run_format: {"slide", "shape_selector", "paragraph_index", "run_index", "format": {"font_name"?, "size_points"?, "bold"?, "italic"?, "underline"?, "color_rgb"?}}
  set_shape_box: {"slide", "shape_selector", "box": {"left_emu"?, "top_emu"?, "width_emu"?, "height_emu"?}}
  set_fill: {"slide", "shape_selector", "fill": {"kind": "none" | "solid", "color_rgb"?}}
  set_notes: {"slide", "text"}
  add_textbox: {"slide", "name", "box": {"left_emu", "top_emu", "width_emu", "height_emu"}, "paragraphs": [{"alignment"?, "bullet"?, "runs": [{"text", "font_name"?, "size_points"?, "bold"?, "italic"?, "underline"?, "color_rgb"?}]}]}
  delete_shape: {"slide", "shape_selector"}
  add_slide: {"after_index", "layout_name"}  (after_index 0 inserts at the front)
  delete_slide: {"slide"}
  duplicate_slide: {"slide", "insert_after"}
  move_slide: {"from_index", "to_index"}
  set_slide_background: {"slide", "fill"}
  refuse: {"reason"}  (only when the request cannot be carried out; must be the only op)"""


@dataclass
class EditOp:
    name: str
    args: dict[str, Any]

    def to_dict(self) -> dict:
        return {self.name: self.args}


@dataclass
class EditScript:
    ops: list[EditOp]

    @property
    def is_refusal(self) -> bool:
        return len(self.ops) == 1 and self.ops[0].name == "refuse"

    def to_dict(self) -> dict:
        return {"ops": [op.to_dict() for op in self.ops]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


@dataclass
class ApplyReport:
    status: str  # "applied" or "refused"
    effects: list[str] = field(default_factory=list)
    reason: Optional[str] = None

    @property
    def applied_ops(self) -> int:
        return len(self.effects)


# -- parsing ----------------------------------------------------------------


class _Fail(Exception):
    def __init__(self, field_path: str, message: str):
        super().__init__(message)
        self.field_path = field_path


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _need(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise _Fail(where, f"{where}: {message}")


def _check_int(v: Any, where: str) -> int:
    _need(_is_int(v), where, f"expected an integer, got {v!r}")
    return v


def _check_str(v: Any, where: str) -> str:
    _need(isinstance(v, str), where, f"expected a string, got {v!r}")
    return v


def _check_color(v: Any, where: str) -> int:
    # range is a validation concern; only the type is fixed here
    _need(_is_int(v), where, f"color must be an integer 0xRRGGBB, got {v!r}")
    return v


def _check_format(v: Any, where: str, extra: tuple[str, ...] = ()) -> dict:
    _need(isinstance(v, dict), where, "expected an object")
    unknown = set(v) - set(FORMAT_FIELDS) - set(extra)
    _need(not unknown, where, f"unknown keys {sorted(unknown)}")
    out = {}
    for key in FORMAT_FIELDS:
        if key not in v:
            continue
        x, sub = v[key], f"{where}.{key}"
        if x is None:
            out[key] = None
        elif key == "font_name":
            out[key] = _check_str(x, sub)
        elif key == "size_points":
            _need(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0, sub,
                  f"expected a positive number, got {x!r}")
            out[key] = x
        elif key == "color_rgb":
            out[key] = _check_color(x, sub)
        else:
            _need(isinstance(x, bool), sub, f"expected true/false, got {x!r}")
            out[key] = x
    return out


def _check_box(v: Any, where: str, partial: bool) -> dict:
    _need(isinstance(v, dict), where, "expected an object")
    unknown = set(v) - set(BOX_FIELDS)
    _need(not unknown, where, f"unknown keys {sorted(unknown)}")
    if partial:
        _need(bool(v), where, "needs at least one of " + ", ".join(BOX_FIELDS))
    else:
        missing = [k for k in BOX_FIELDS if k not in v]
        _need(not missing, where, f"missing {missing}")
    return {k: _check_int(v[k], f"{where}.{k}") for k in BOX_FIELDS if k in v}


def _check_fill(v: Any, where: str) -> dict:
    _need(isinstance(v, dict), where, "expected an object")
    unknown = set(v) - {"kind", "color_rgb"}
    _need(not unknown, where, f"unknown keys {sorted(unknown)}")
    kind = v.get("kind")
    _need(kind in EDITABLE_FILLS, f"{where}.kind", f"must be one of {EDITABLE_FILLS}, got {kind!r}")
    if kind == "solid":
        _need("color_rgb" in v, f"{where}.color_rgb", "required for a solid fill")
        return {"kind": kind, "color_rgb": _check_color(v["color_rgb"], f"{where}.color_rgb")}
    _need(v.get("color_rgb") is None, f"{where}.color_rgb", "only allowed for a solid fill")
    return {"kind": kind}


def _check_paragraphs(v: Any, where: str) -> list:
    _need(isinstance(v, list), where, "expected an array")
    out = []
    for i, p in enumerate(v):
        sub = f"{where}[{i}]"
        _need(isinstance(p, dict), sub, "expected an object")
        unknown = set(p) - {"alignment", "bullet", "runs"}
        _need(not unknown, sub, f"unknown keys {sorted(unknown)}")
        para: dict[str, Any] = {}
        if p.get("alignment") is not None:
            _need(p["alignment"] in ALIGNMENTS, f"{sub}.alignment", f"must be one of {ALIGNMENTS}")
            para["alignment"] = p["alignment"]
        if p.get("bullet") is not None:
            _need(isinstance(p["bullet"], bool), f"{sub}.bullet", "expected true/false")
            para["bullet"] = p["bullet"]
        runs = p.get("runs", [])
        _need(isinstance(runs, list), f"{sub}.runs", "expected an array")
        checked = []
        for j, r in enumerate(runs):
            rsub = f"{sub}.runs[{j}]"
            fmt = _check_format(r, rsub, extra=("text",))
            _need("text" in r, f"{rsub}.text", "missing")
            checked.append({"text": _check_str(r["text"], f"{rsub}.text"), **fmt})
        para["runs"] = checked
        out.append(para)
    return out


_CHECKS: dict[str, Callable[[Any, str], Any]] = {
    "int": _check_int,
    "str": _check_str,
    "format": _check_format,
    "box": lambda v, w: _check_box(v, w, partial=False),
    "partial_box": lambda v, w: _check_box(v, w, partial=True),
    "fill": _check_fill,
    "paragraphs": _check_paragraphs,
}


def script_from_obj(obj: Any, raw: str = "") -> EditScript:
    try:
        if isinstance(obj, list):
            obj = {"ops": obj}
        _need(isinstance(obj, dict), "ops", "script must be a JSON object with an 'ops' array")
        _need(isinstance(obj.get("ops"), list), "ops", "script must have an 'ops' array")
        _need(len(obj["ops"]) > 0, "ops", "script has no ops")
        ops = []
        for i, item in enumerate(obj["ops"]):
            where = f"ops[{i}]"
            _need(isinstance(item, dict) and len(item) == 1, where,
                  "each op must be an object with exactly one key")
            (name, payload), = item.items()
            _need(name in GRAMMAR, where, f"unknown op {name!r}")
            where = f"{where}.{name}"
            _need(isinstance(payload, dict), where, "payload must be an object")
            spec = GRAMMAR[name]
            unknown = set(payload) - set(spec)
            _need(not unknown, where, f"unknown fields {sorted(unknown)}")
            args = {}
            for key, kind in spec.items():
                _need(key in payload, f"{where}.{key}", "missing")
                args[key] = _CHECKS[kind](payload[key], f"{where}.{key}")
            ops.append(EditOp(name, args))
        if any(op.name == "refuse" for op in ops):
            _need(len(ops) == 1, "ops", "refuse must be the only op in a script")
    except _Fail as exc:
        raise ScriptParseError(str(exc), raw, exc.field_path) from None
    return EditScript(ops)


def parse_edit_script(llm_output: str) -> EditScript:
    try:
        obj = loads_lenient(llm_output)
    except json.JSONDecodeError as exc:
        raise ScriptParseError(f"script is not JSON: {exc}", llm_output) from None
    return script_from_obj(obj, llm_output)


# -- validation -------------------------------------------------------------


@dataclass
class _ShadowShape:
    id: str
    name: str
    kind: str
    runs: Optional[list[int]]  # run count per paragraph; None when the shape has no text


def _shadow_slide(slide: Slide) -> list[_ShadowShape]:
    out = []
    for s in slide.shapes:
        runs = None
        if s.text_frame is not None:
            runs = [len(p.runs) for p in s.text_frame.paragraphs]
        elif s.kind in TEXT_KINDS:
            runs = []
        out.append(_ShadowShape(s.id, s.name, s.kind, runs))
    return out


def _numeric_ids(ids) -> list[int]:
    return [int(i) for i in ids if re.fullmatch(r"\d+", i)]


def next_shape_id(ids) -> str:
    return str(max(_numeric_ids(ids), default=1) + 1)


def _lookup(shapes: list, selector: str, slide_no: int, op_index: int):
    for s in shapes:
        if s.id == selector:
            return s
    named = [s for s in shapes if s.name == selector]
    if len(named) == 1:
        return named[0]
    if not named:
        raise ShapeNotFound(f"no object {selector!r} on slide {slide_no}", op_index)
    raise ShapeNotFound(f"{len(named)} objects named {selector!r} on slide {slide_no}; "
                        "select by id", op_index)


def _check_range(value: int, lo: int, hi: int, what: str, op_index: int) -> None:
    if not lo <= value <= hi:
        raise SlideOutOfRange(f"{what} {value} not in {lo}..{hi}", op_index)


def _color_ok(value: Optional[int], where: str, op_index: int) -> None:
    if value is not None and not 0 <= value <= MAX_RGB:
        raise InvalidColor(f"{where} {value:#x} is not a 24-bit color", op_index)


def _layout_shadow(deck: Deck, layout_name: str) -> list[_ShadowShape]:
    try:
        return _shadow_slide(package.slide_from_layout(deck, layout_name, 1))
    except (KeyError, ValueError):
        # reported by apply_script, which owns layout errors
        return []


def validate_script(script: EditScript, deck: Deck) -> None:
    """Raise a ScriptValidationError for the first op that cannot run."""
    slides = [_shadow_slide(s) for s in deck.slides]
    for i, op in enumerate(script.ops):
        a = op.args
        n = len(slides)
        name = op.name
        if name == "refuse":
            return
        if name == "add_slide":
            _check_range(a["after_index"], 0, n, "after_index", i)
            slides.insert(a["after_index"], _layout_shadow(deck, a["layout_name"]))
            continue
        if name == "move_slide":
            _check_range(a["from_index"], 1, n, "from_index", i)
            _check_range(a["to_index"], 1, n, "to_index", i)
            slides.insert(a["to_index"] - 1, slides.pop(a["from_index"] - 1))
            continue
        _check_range(a["slide"], 1, n, "slide", i)
        shapes = slides[a["slide"] - 1]
        if name == "delete_slide":
            slides.pop(a["slide"] - 1)
        elif name == "duplicate_slide":
            _check_range(a["insert_after"], 0, n, "insert_after", i)
            slides.insert(a["insert_after"], copy.deepcopy(shapes))
        elif name == "set_slide_background":
            _color_ok(a["fill"].get("color_rgb"), "fill.color_rgb", i)
        elif name == "set_notes":
            pass
        elif name == "add_textbox":
            for k in ("width_emu", "height_emu"):
                if a["box"][k] < 0:
                    raise InvalidGeometry(f"box.{k} must be non-negative", i)
            for p in a["paragraphs"]:
                for r in p["runs"]:
                    _color_ok(r.get("color_rgb"), "run color_rgb", i)
            new_id = next_shape_id(s.id for s in shapes)
            shapes.append(_ShadowShape(new_id, a["name"], "textbox",
                                       [len(p["runs"]) for p in a["paragraphs"]]))
        else:
            shape = _lookup(shapes, a["shape_selector"], a["slide"], i)
            if name == "delete_shape":
                shapes.remove(shape)
            elif name == "set_shape_box":
                for k in ("width_emu", "height_emu"):
                    if a["box"].get(k, 0) < 0:
                        raise InvalidGeometry(f"box.{k} must be non-negative", i)
            elif name == "set_fill":
                _color_ok(a["fill"].get("color_rgb"), "fill.color_rgb", i)
            elif name in ("set_run_text", "set_run_format"):
                _check_run(shape, a, name == "set_run_text", i)
                if name == "set_run_format":
                    _color_ok(a["format"].get("color_rgb"), "format.color_rgb", i)


def _check_run(shape: _ShadowShape, a: dict, may_append: bool, i: int) -> None:
    if shape.runs is None:
        raise RunOutOfRange(f"object {shape.id} ({shape.kind}) holds no text", i)
    pi, ri = a["paragraph_index"], a["run_index"]
    n_par = len(shape.runs)
    if may_append and pi == n_par and ri == 0:
        shape.runs.append(1)
        return
    if not 0 <= pi < n_par:
        raise RunOutOfRange(f"object {shape.id} has no paragraph {pi} ({n_par} paragraphs)", i)
    n_run = shape.runs[pi]
    if may_append and ri == n_run:
        shape.runs[pi] += 1
        return
    if not 0 <= ri < n_run:
        raise RunOutOfRange(f"object {shape.id} paragraph {pi} has no run {ri} ({n_run} runs)", i)


# -- application ------------------------------------------------------------


def script_text(text: str) -> str:
    """Newlines inside a run become in-paragraph line breaks."""
    return text.replace("\r\n", LINE_BREAK).replace("\n", LINE_BREAK).replace("\r", LINE_BREAK)


def _fill(obj: dict) -> Fill:
    return Fill(obj["kind"], obj.get("color_rgb"))


def _format_from(obj: dict) -> RunFormat:
    fmt = RunFormat()
    for key in FORMAT_FIELDS:
        if obj.get(key) is not None:
            value = float(obj[key]) if key == "size_points" else obj[key]
            setattr(fmt, key, value)
    return fmt


def _resolve(slide: Slide, selector: str, op_index: int) -> Shape:
    try:
        return find_shape(slide, selector)
    except (NotFound, Ambiguous) as exc:
        raise ShapeNotFound(str(exc), op_index) from None


def _apply_op(deck: Deck, op: EditOp, i: int) -> str:
    a = op.args
    name = op.name
    if name == "add_slide":
        try:
            slide = package.slide_from_layout(deck, a["layout_name"], a["after_index"] + 1)
        except KeyError:
            known = ", ".join(repr(n) for n in package.layout_names(deck)) or "none"
            raise ApplyError(f"unknown layout {a['layout_name']!r} (known: {known})", i) from None
        deck.slides.insert(a["after_index"], slide)
        deck.renumber()
        return f"added slide {a['after_index'] + 1} ({a['layout_name']})"
    if name == "move_slide":
        deck.slides.insert(a["to_index"] - 1, deck.slides.pop(a["from_index"] - 1))
        deck.renumber()
        return f"moved slide {a['from_index']} to {a['to_index']}"
    slide = deck.slides[a["slide"] - 1]
    if name == "delete_slide":
        deck.slides.pop(a["slide"] - 1)
        deck.renumber()
        return f"deleted slide {a['slide']}"
    if name == "duplicate_slide":
        deck.slides.insert(a["insert_after"], copy.deepcopy(slide))
        deck.renumber()
        return f"duplicated slide {a['slide']} after {a['insert_after']}"
    if name == "set_slide_background":
        slide.background = _fill(a["fill"])
        return f"slide {a['slide']}: background {a['fill']['kind']}"
    if name == "set_notes":
        text = a["text"].replace("\r\n", "\n").replace("\r", "\n")
        origin = slide.origin
        has_page = origin is not None and getattr(origin, "notes_xml", None) is not None
        if text and not has_page and not package.can_hold_notes(deck):
            raise ApplyError("deck has no notes master or theme, so a notes page cannot be created", i)
        slide.notes_text = text
        return f"slide {a['slide']}: notes set"
    if name == "add_textbox":
        new_id = next_shape_id(slide.shape_ids())
        paragraphs = [
            Paragraph([Run(script_text(r["text"]), _format_from(r)) for r in p["runs"]],
                      p.get("alignment"), p.get("bullet"))
            for p in a["paragraphs"]
        ]
        box = Box(*(a["box"][k] for k in BOX_FIELDS))
        slide.shapes.append(Shape(new_id, a["name"], "textbox", box, Fill("none"), TextFrame(paragraphs)))
        return f"slide {a['slide']}: added textbox {new_id}"

    shape = _resolve(slide, a["shape_selector"], i)
    where = f"slide {a['slide']} object {shape.id}"
    if name == "delete_shape":
        slide.shapes.remove(shape)
        return f"{where}: deleted"
    if name == "set_shape_box":
        if not can_set_box(shape):
            raise ApplyError(f"{where} ({shape.kind}) has no editable geometry", i)
        values = {k: getattr(shape.box, k) for k in BOX_FIELDS}
        values.update(a["box"])
        shape.box = Box(**values)
        return f"{where}: box set"
    if name == "set_fill":
        if not can_set_fill(shape):
            raise ApplyError(f"{where} ({shape.kind}) cannot take a fill", i)
        shape.fill = _fill(a["fill"])
        return f"{where}: fill {a['fill']['kind']}"
    # run-level ops
    if shape.text_frame is None:
        shape.text_frame = TextFrame([])
    paras = shape.text_frame.paragraphs
    pi, ri = a["paragraph_index"], a["run_index"]
    if pi == len(paras):
        paras.append(Paragraph([]))
    runs = paras[pi].runs
    if name == "set_run_text":
        text = script_text(a["text"])
        if ri == len(runs):
            fmt = copy.copy(runs[-1].format) if runs else RunFormat()
            runs.append(Run(text, fmt))
        else:
            runs[ri].text = text
        return f"{where}: paragraph {pi} run {ri} text set"
    fmt = copy.copy(runs[ri].format)
    for key, value in a["format"].items():
        if key == "size_points" and value is not None:
            value = float(value)
        setattr(fmt, key, value)
    runs[ri].format = fmt
    return f"{where}: paragraph {pi} run {ri} format set"


def split_line_breaks(p: Paragraph) -> None:
    """Give every line break its own run, as the reader does for ``a:br``."""
    out: list[Run] = []
    for run in p.runs:
        if LINE_BREAK not in run.text or run.text == LINE_BREAK:
            out.append(run)
            continue
        for k, seg in enumerate(run.text.split(LINE_BREAK)):
            if k:
                out.append(Run(LINE_BREAK, copy.copy(run.format)))
            if seg:
                out.append(Run(seg, copy.copy(run.format), run.origin if k == 0 else None))
    p.runs[:] = out


def apply_script(script: EditScript, deck: Deck) -> tuple[Deck, ApplyReport]:
    """Apply ``script`` to a copy of ``deck``; the input deck is never modified."""
    if script.is_refusal:
        return deck, ApplyReport("refused", reason=script.ops[0].args["reason"])
    validate_script(script, deck)
    work = deck.copy()
    report = ApplyReport("applied")
    for i, op in enumerate(script.ops):
        try:
            report.effects.append(_apply_op(work, op, i))
        except ValueError as exc:
            # model invariants (e.g. a geometry the format cannot hold)
            raise ApplyError(str(exc), i) from exc
    for slide in work.slides:
        for shape in slide.shapes:
            if shape.text_frame is not None:
                for p in shape.text_frame.paragraphs:
                    split_line_breaks(p)
    return work, report
