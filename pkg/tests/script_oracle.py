"""A brute-force EditScript interpreter over slide JSON, plus a random script generator.

The oracle never touches the deck model: it edits the list of slide JSON
objects directly, which makes it an independent check on apply_script.
"""
from __future__ import annotations

import copy
import random
from typing import Optional

BOX_KEYS = ("left_emu", "top_emu", "width_emu", "height_emu")
FORMAT_KEYS = ("font_name", "size_points", "bold", "italic", "underline", "color_rgb")


def _hex(value: int) -> str:
    return f"{value:06X}"


def _fill(obj: dict) -> dict:
    out = {"kind": obj["kind"]}
    if obj.get("color_rgb") is not None:
        out["color_rgb"] = _hex(obj["color_rgb"])
    return out


def _run(text: str, fmt: dict) -> dict:
    out = {"text": text}
    for key in FORMAT_KEYS:
        value = fmt.get(key)
        if value is None:
            continue
        if key == "color_rgb":
            value = _hex(value)
        elif key == "size_points":
            value = int(value) if float(value).is_integer() else float(value)
        out[key] = value
    return out


def _shape(slide: dict, selector: str) -> dict:
    for obj in slide["objects"]:
        if obj["id"] == selector:
            return obj
    named = [o for o in slide["objects"] if o["name"] == selector]
    assert len(named) == 1
    return named[0]


def _renumber(slides: list) -> None:
    for i, s in enumerate(slides, start=1):
        s["slide_index"] = i


def oracle_apply(ops: list[dict], slides: list[dict]) -> list[dict]:
    """Apply raw script ops to slide JSON; inputs must be valid for the deck."""
    slides = copy.deepcopy(slides)
    for raw in ops:
        (name, a), = raw.items()
        if name == "move_slide":
            slides.insert(a["to_index"] - 1, slides.pop(a["from_index"] - 1))
            _renumber(slides)
            continue
        slide = slides[a["slide"] - 1]
        if name == "delete_slide":
            slides.pop(a["slide"] - 1)
            _renumber(slides)
        elif name == "duplicate_slide":
            slides.insert(a["insert_after"], copy.deepcopy(slide))
            _renumber(slides)
        elif name == "set_slide_background":
            slide["background"] = _fill(a["fill"])
        elif name == "set_notes":
            slide["notes"] = a["text"]
        elif name == "add_textbox":
            ids = [int(o["id"]) for o in slide["objects"] if o["id"].isdigit()]
            slide["objects"].append({
                "id": str(max(ids, default=1) + 1),
                "name": a["name"],
                "type": "textbox",
                "position": {k: a["box"][k] for k in BOX_KEYS},
                "fill": {"kind": "none"},
                "paragraphs": [{"runs": [_run(r["text"], r) for r in p["runs"]]} for p in a["paragraphs"]],
            })
        else:
            shape = _shape(slide, a["shape_selector"])
            if name == "delete_shape":
                slide["objects"].remove(shape)
            elif name == "set_shape_box":
                shape["position"].update(a["box"])
            elif name == "set_fill":
                shape["fill"] = _fill(a["fill"])
            else:
                paras = shape.setdefault("paragraphs", [])
                pi, ri = a["paragraph_index"], a["run_index"]
                if pi == len(paras):
                    paras.append({"runs": []})
                runs = paras[pi]["runs"]
                if name == "set_run_text":
                    if ri == len(runs):
                        prev = {k: v for k, v in runs[-1].items() if k != "text"} if runs else {}
                        runs.append({"text": a["text"], **prev})
                    else:
                        runs[ri]["text"] = a["text"]
                else:
                    run = runs[ri]
                    fmt = {k: run[k] for k in FORMAT_KEYS if k in run}
                    if "color_rgb" in fmt:
                        fmt["color_rgb"] = int(fmt["color_rgb"], 16)
                    fmt.update(a["format"])
                    runs[ri] = _run(run["text"], fmt)
    return slides


WORDS = ["alpha", "beta", "Gamma", "delta ", "é", "数据"]


def _text(rng: random.Random) -> str:
    return "".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))


def _format(rng: random.Random) -> dict:
    fmt = {}
    for key in rng.sample(FORMAT_KEYS, rng.randint(1, 3)):
        fmt[key] = {
            "font_name": lambda: rng.choice(["Arial", "Calibri"]),
            "size_points": lambda: rng.choice([10, 18, 24.5]),
            "bold": lambda: rng.choice([True, False]),
            "italic": lambda: rng.choice([True, False]),
            "underline": lambda: rng.choice([True, False]),
            "color_rgb": lambda: rng.randrange(0x1000000),
        }[key]()
    return fmt


def random_op(rng: random.Random, slides: list[dict]) -> Optional[dict]:
    """One op that is valid for ``slides`` (None when nothing fits)."""
    n = len(slides)
    k = rng.randint(1, n)
    slide = slides[k - 1]
    shapes = [o for o in slide["objects"] if o["type"] in ("textbox", "placeholder", "autoshape")]
    kind = rng.choice(["text", "text", "format", "format", "box", "fill", "notes", "add", "delete_shape",
                       "delete_slide", "duplicate", "move", "background"])
    if kind in ("text", "format", "box", "fill", "delete_shape") and not shapes:
        kind = "add"
    if kind == "delete_slide" and n == 1:
        kind = "duplicate"
    if kind == "text":
        obj = rng.choice(shapes)
        paras = obj.get("paragraphs") or []
        pi = rng.randint(0, len(paras))
        if pi == len(paras):
            ri = 0
        else:
            ri = rng.randint(0, len(paras[pi]["runs"]))
        return {"set_run_text": {"slide": k, "shape_selector": obj["id"], "paragraph_index": pi,
                                 "run_index": ri, "text": _text(rng)}}
    if kind == "format":
        obj = rng.choice(shapes)
        spots = [(pi, ri) for pi, p in enumerate(obj.get("paragraphs") or []) for ri in range(len(p["runs"]))]
        if not spots:
            return None
        pi, ri = rng.choice(spots)
        return {"set_run_format": {"slide": k, "shape_selector": obj["id"], "paragraph_index": pi,
                                   "run_index": ri, "format": _format(rng)}}
    if kind == "box":
        obj = rng.choice(shapes)
        box = {key: rng.randrange(0, 5_000_000) for key in rng.sample(BOX_KEYS, rng.randint(1, 4))}
        return {"set_shape_box": {"slide": k, "shape_selector": obj["id"], "box": box}}
    if kind == "fill":
        obj = rng.choice(shapes)
        fill = rng.choice([{"kind": "none"}, {"kind": "solid", "color_rgb": rng.randrange(0x1000000)}])
        return {"set_fill": {"slide": k, "shape_selector": obj["id"], "fill": fill}}
    if kind == "notes":
        return {"set_notes": {"slide": k, "text": rng.choice(["", _text(rng)])}}
    if kind == "add":
        box = {key: rng.randrange(1, 3_000_000) for key in BOX_KEYS}
        paras = [{"runs": [{"text": _text(rng), **_format(rng)} for _ in range(rng.randint(1, 2))]}
                 for _ in range(rng.randint(1, 2))]
        return {"add_textbox": {"slide": k, "name": f"Box {rng.randint(1, 99)}", "box": box, "paragraphs": paras}}
    if kind == "delete_shape":
        return {"delete_shape": {"slide": k, "shape_selector": rng.choice(shapes)["id"]}}
    if kind == "delete_slide":
        return {"delete_slide": {"slide": k}}
    if kind == "duplicate":
        return {"duplicate_slide": {"slide": k, "insert_after": rng.randint(0, n)}}
    if kind == "move":
        return {"move_slide": {"from_index": k, "to_index": rng.randint(1, n)}}
    fill = rng.choice([{"kind": "none"}, {"kind": "solid", "color_rgb": rng.randrange(0x1000000)}])
    return {"set_slide_background": {"slide": k, "fill": fill}}


def random_script(rng: random.Random, slides: list[dict], length: int) -> tuple[list[dict], list[dict]]:
    """A valid script of up to ``length`` ops and the oracle's expected result."""
    ops, state = [], slides
    for _ in range(length):
        op = random_op(rng, state)
        if op is None:
            continue
        ops.append(op)
        state = oracle_apply([op], state)
    return ops, state


def break_op(rng: random.Random, op: dict, slides: list[dict]) -> dict:
    """Make ``op`` invalid in a way validation must catch."""
    (name, a), = copy.deepcopy(op).items()
    if "slide" in a:
        a["slide"] = len(slides) + rng.randint(20, 30)
    elif "from_index" in a:
        a["from_index"] = 0
    return {name: a}
