"""DrawingML / PresentationML element mapping.

Reading turns slide XML into model nodes. Writing never regenerates a
node that is still equal to what its origin element parses to; changed
nodes are rebuilt from a copy of their origin so unmodeled attributes
(language tags, effects, spacing, ...) are kept.
"""
from __future__ import annotations

import copy
import posixpath
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from lxml import etree

from .model import (
    LINE_BREAK,
    Box,
    Fill,
    Paragraph,
    Run,
    RunFormat,
    Shape,
    TextFrame,
)

NS = {
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
    "mc": "http://schemas.openxmlformats.org/markup-compatibility/2006",
}
PKG_RELS = "http://schemas.openxmlformats.org/package/2006/relationships"
CONTENT_TYPES = "http://schemas.openxmlformats.org/package/2006/content-types"
P14 = "http://schemas.microsoft.com/office/powerpoint/2010/main"

_RT = "http://schemas.openxmlformats.org/officeDocument/2006/relationships/"
RT_OFFICE_DOCUMENT = _RT + "officeDocument"
RT_SLIDE = _RT + "slide"
RT_SLIDE_LAYOUT = _RT + "slideLayout"
RT_SLIDE_MASTER = _RT + "slideMaster"
RT_THEME = _RT + "theme"
RT_NOTES_SLIDE = _RT + "notesSlide"
RT_NOTES_MASTER = _RT + "notesMaster"

CT_SLIDE = "application/vnd.openxmlformats-officedocument.presentationml.slide+xml"
CT_NOTES = "application/vnd.openxmlformats-officedocument.presentationml.notesSlide+xml"
CT_NOTES_MASTER = "application/vnd.openxmlformats-officedocument.presentationml.notesMaster+xml"
CT_THEME = "application/vnd.openxmlformats-officedocument.theme+xml"

URI_TABLE = "http://schemas.openxmlformats.org/drawingml/2006/table"
URI_CHART = "http://schemas.openxmlformats.org/drawingml/2006/chart"

_PARSER = etree.XMLParser(remove_blank_text=False, resolve_entities=False, huge_tree=True)


def qn(tag: str) -> str:
    prefix, local = tag.split(":")
    return f"{{{NS[prefix]}}}{local}"


def local(el: etree._Element) -> str:
    return etree.QName(el).localname if isinstance(el.tag, str) else ""


def parse_xml(data: bytes) -> etree._Element:
    return etree.fromstring(data, _PARSER)


def serialize(root: etree._Element) -> bytes:
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", standalone=True)


# -- part names and relationships ------------------------------------------


def rels_part_for(part: str) -> str:
    head, tail = posixpath.split(part)
    return posixpath.join(head, "_rels", tail + ".rels")


def resolve_target(source_part: str, target: str) -> str:
    if target.startswith("/"):
        return target.lstrip("/")
    base = posixpath.dirname(source_part)
    return posixpath.normpath(posixpath.join(base, target))


def relative_target(source_part: str, target_part: str) -> str:
    return posixpath.relpath(target_part, posixpath.dirname(source_part) or ".")


@dataclass(frozen=True)
class Relationship:
    rid: str
    type: str
    target: str  # resolved part name, or the raw target for external links
    external: bool = False


def read_rels(data: Optional[bytes], source_part: str) -> dict[str, Relationship]:
    if not data:
        return {}
    root = parse_xml(data)
    rels: dict[str, Relationship] = {}
    for el in root:
        if local(el) != "Relationship":
            continue
        external = el.get("TargetMode") == "External"
        target = el.get("Target", "")
        if not external:
            target = resolve_target(source_part, target)
        rels[el.get("Id")] = Relationship(el.get("Id"), el.get("Type"), target, external)
    return rels


def build_rels(source_part: str, rels: Iterable[Relationship]) -> bytes:
    root = etree.Element(f"{{{PKG_RELS}}}Relationships", nsmap={None: PKG_RELS})
    for rel in rels:
        el = etree.SubElement(root, f"{{{PKG_RELS}}}Relationship")
        el.set("Id", rel.rid)
        el.set("Type", rel.type)
        if rel.external:
            el.set("Target", rel.target)
            el.set("TargetMode", "External")
        else:
            el.set("Target", relative_target(source_part, rel.target))
    return serialize(root)


def next_rid(used: Iterable[str]) -> str:
    nums = [int(m.group(1)) for u in used if (m := re.fullmatch(r"rId(\d+)", u))]
    return f"rId{max(nums, default=0) + 1}"


# -- theme context ----------------------------------------------------------


@dataclass(frozen=True)
class Theme:
    colors: dict = field(default_factory=dict)
    major_font: Optional[str] = None
    minor_font: Optional[str] = None
    fill_styles: tuple = ()
    bg_fill_styles: tuple = ()


def read_theme(data: Optional[bytes]) -> Theme:
    if not data:
        return Theme()
    root = parse_xml(data)
    colors: dict[str, int] = {}
    scheme = root.find(".//a:clrScheme", NS)
    if scheme is not None:
        for slot in scheme:
            if not len(slot):
                continue
            c = slot[0]
            if local(c) == "srgbClr" and c.get("val"):
                colors[local(slot)] = int(c.get("val"), 16)
            elif local(c) == "sysClr" and c.get("lastClr"):
                colors[local(slot)] = int(c.get("lastClr"), 16)

    def font(path: str) -> Optional[str]:
        el = root.find(path, NS)
        return el.get("typeface") if el is not None else None

    fills = root.find(".//a:fmtScheme/a:fillStyleLst", NS)
    bg_fills = root.find(".//a:fmtScheme/a:bgFillStyleLst", NS)
    return Theme(
        colors=colors,
        major_font=font(".//a:fontScheme/a:majorFont/a:latin"),
        minor_font=font(".//a:fontScheme/a:minorFont/a:latin"),
        fill_styles=tuple(fills) if fills is not None else (),
        bg_fill_styles=tuple(bg_fills) if bg_fills is not None else (),
    )


DEFAULT_CLR_MAP = {"bg1": "lt1", "tx1": "dk1", "bg2": "lt2", "tx2": "dk2"}


@dataclass
class SlideContext:
    """Everything needed to interpret one slide's XML."""

    part: Optional[str]
    rels: dict = field(default_factory=dict)
    theme: Theme = field(default_factory=Theme)
    clr_map: dict = field(default_factory=lambda: dict(DEFAULT_CLR_MAP))
    layout_part: Optional[str] = None
    layout_name: str = ""
    # placeholder geometry inherited from layout then master
    ph_by_idx: dict = field(default_factory=dict)
    ph_by_type: dict = field(default_factory=dict)
    inherited_background: Fill = field(default_factory=Fill)

    def __deepcopy__(self, memo):
        return self


# -- colors and fills -------------------------------------------------------

_COLOR_TAGS = {"srgbClr", "schemeClr", "sysClr", "scrgbClr", "prstClr", "hslClr"}


def resolve_color(el: etree._Element, ctx: SlideContext, placeholder: Optional[int] = None) -> Optional[int]:
    """Resolve a DrawingML color element to 0xRRGGBB, or None if it needs transforms."""
    if any(local(m) != "alpha" for m in el):
        return None
    tag = local(el)
    if tag == "srgbClr":
        return int(el.get("val"), 16)
    if tag == "sysClr" and el.get("lastClr"):
        return int(el.get("lastClr"), 16)
    if tag == "schemeClr":
        name = el.get("val")
        if name == "phClr":
            return placeholder
        name = ctx.clr_map.get(name, name)
        return ctx.theme.colors.get(name)
    return None


def _color_child(el: etree._Element) -> Optional[etree._Element]:
    for child in el:
        if local(child) in _COLOR_TAGS:
            return child
    return None


_FILL_TAGS = ("noFill", "solidFill", "gradFill", "blipFill", "pattFill", "grpFill")


def fill_from_element(el: etree._Element, ctx: SlideContext, placeholder: Optional[int] = None) -> Optional[Fill]:
    tag = local(el)
    if tag == "noFill":
        return Fill("none")
    if tag == "solidFill":
        c = _color_child(el)
        rgb = resolve_color(c, ctx, placeholder) if c is not None else None
        return Fill("solid", rgb) if rgb is not None else None
    if tag == "gradFill":
        return Fill("gradient")
    if tag == "blipFill":
        return Fill("picture")
    return None


def find_fill(container: Optional[etree._Element]) -> Optional[etree._Element]:
    if container is None:
        return None
    for child in container:
        if local(child) in _FILL_TAGS:
            return child
    return None


def solid_fill_element(rgb: int) -> etree._Element:
    el = etree.Element(qn("a:solidFill"))
    etree.SubElement(el, qn("a:srgbClr")).set("val", f"{rgb:06X}")
    return el


def fill_element(fill: Fill) -> etree._Element:
    if fill.kind == "none":
        return etree.Element(qn("a:noFill"))
    if fill.kind == "solid":
        return solid_fill_element(fill.color_rgb)
    raise ValueError(f"cannot synthesize a {fill.kind} fill")


def insert_ordered(parent: etree._Element, child: etree._Element, order: list[str]) -> None:
    """Insert ``child`` respecting the schema sequence ``order`` of local names."""
    rank = {name: i for i, name in enumerate(order)}
    mine = rank.get(local(child), len(order))
    for i, existing in enumerate(parent):
        if rank.get(local(existing), len(order)) > mine:
            parent.insert(i, child)
            return
    parent.append(child)


_RPR_ORDER = [
    "ln", *_FILL_TAGS, "effectLst", "effectDag", "highlight", "uLnTx", "uLn",
    "uFillTx", "uFill", "latin", "ea", "cs", "sym", "hlinkClick", "hlinkMouseOver",
    "rtl", "extLst",
]
_SPPR_ORDER = [
    "xfrm", "custGeom", "prstGeom", *_FILL_TAGS, "ln", "effectLst", "effectDag",
    "scene3d", "sp3d", "extLst",
]
_PPR_ORDER = [
    "lnSpc", "spcBef", "spcAft", "buClrTx", "buClr", "buSzTx", "buSzPct", "buSzPts",
    "buFontTx", "buFont", "buNone", "buAutoNum", "buChar", "buBlip", "tabLst",
    "defRPr", "extLst",
]
_BULLET_TAGS = ("buNone", "buAutoNum", "buChar", "buBlip")


def replace_fill(container: etree._Element, fill: Optional[Fill], order: list[str]) -> None:
    old = find_fill(container)
    if old is not None:
        container.remove(old)
    if fill is not None:
        insert_ordered(container, fill_element(fill), order)


# -- runs and paragraphs ----------------------------------------------------

_BOOL = {"1": True, "true": True, "on": True, "0": False, "false": False, "off": False}


def format_from_rpr(rpr: Optional[etree._Element], ctx: SlideContext) -> RunFormat:
    if rpr is None:
        return RunFormat()
    fmt = RunFormat()
    if rpr.get("sz"):
        size = int(rpr.get("sz")) / 100
        fmt.size_points = size if size > 0 else None
    if rpr.get("b") is not None:
        fmt.bold = _BOOL.get(rpr.get("b"))
    if rpr.get("i") is not None:
        fmt.italic = _BOOL.get(rpr.get("i"))
    if rpr.get("u") is not None:
        fmt.underline = rpr.get("u") != "none"
    latin = rpr.find("a:latin", NS)
    if latin is not None and latin.get("typeface"):
        face = latin.get("typeface")
        if face.startswith("+mj"):
            face = ctx.theme.major_font
        elif face.startswith("+mn"):
            face = ctx.theme.minor_font
        fmt.font_name = face or None
    fill = find_fill(rpr)
    if fill is not None and local(fill) == "solidFill":
        c = _color_child(fill)
        if c is not None:
            fmt.color_rgb = resolve_color(c, ctx)
    return fmt


def _set_tristate(rpr: etree._Element, attr: str, value: Optional[bool]) -> None:
    if value is None:
        rpr.attrib.pop(attr, None)
    else:
        rpr.set(attr, "1" if value else "0")


def apply_format(rpr: etree._Element, fmt: RunFormat, ctx: SlideContext) -> None:
    """Write the fields of ``fmt`` that differ from what ``rpr`` already says."""
    old = format_from_rpr(rpr, ctx)
    if fmt.size_points != old.size_points:
        if fmt.size_points is None:
            rpr.attrib.pop("sz", None)
        else:
            rpr.set("sz", str(int(round(fmt.size_points * 100))))
    if fmt.bold != old.bold:
        _set_tristate(rpr, "b", fmt.bold)
    if fmt.italic != old.italic:
        _set_tristate(rpr, "i", fmt.italic)
    if fmt.underline != old.underline:
        if fmt.underline is None:
            rpr.attrib.pop("u", None)
        else:
            rpr.set("u", "sng" if fmt.underline else "none")
    if fmt.font_name != old.font_name:
        latin = rpr.find("a:latin", NS)
        if fmt.font_name is None:
            if latin is not None:
                rpr.remove(latin)
        else:
            if latin is None:
                latin = etree.Element(qn("a:latin"))
                insert_ordered(rpr, latin, _RPR_ORDER)
            latin.attrib.clear()
            latin.set("typeface", fmt.font_name)
    if fmt.color_rgb != old.color_rgb:
        old_fill = find_fill(rpr)
        if old_fill is not None:
            rpr.remove(old_fill)
        if fmt.color_rgb is not None:
            insert_ordered(rpr, solid_fill_element(fmt.color_rgb), _RPR_ORDER)


def run_from_element(el: etree._Element, ctx: SlideContext) -> Optional[Run]:
    tag = local(el)
    if tag not in ("r", "br", "fld"):
        return None
    fmt = format_from_rpr(el.find("a:rPr", NS), ctx)
    if tag == "br":
        text = LINE_BREAK
    else:
        t = el.find("a:t", NS)
        text = (t.text or "") if t is not None else ""
    return Run(text, fmt, el)


_ALIGN_IN = {"l": "left", "ctr": "center", "r": "right", "just": "justify"}
_ALIGN_OUT = {v: k for k, v in _ALIGN_IN.items()}


def paragraph_from_element(el: etree._Element, ctx: SlideContext) -> Paragraph:
    ppr = el.find("a:pPr", NS)
    alignment = bullet = None
    if ppr is not None:
        alignment = _ALIGN_IN.get(ppr.get("algn"))
        for child in ppr:
            if local(child) == "buNone":
                bullet = False
            elif local(child) in ("buAutoNum", "buChar", "buBlip"):
                bullet = True
    runs = [r for child in el if (r := run_from_element(child, ctx)) is not None]
    return Paragraph(runs, alignment, bullet, el)


_XML_UNSAFE = re.compile(r"[\x00-\x08\x0c\x0e-\x1f]")


def clean_text(text: str) -> str:
    return _XML_UNSAFE.sub("", text)


def _build_run(run: Run, ctx: SlideContext) -> list[etree._Element]:
    if run.origin is not None and run_from_element(run.origin, ctx) == run:
        return [copy.deepcopy(run.origin)]
    template = run.origin if run.origin is not None and local(run.origin) in ("r", "fld") else None
    base_rpr = None
    if run.origin is not None and run.origin.find("a:rPr", NS) is not None:
        base_rpr = copy.deepcopy(run.origin.find("a:rPr", NS))
    if base_rpr is None:
        base_rpr = etree.Element(qn("a:rPr"))
        base_rpr.set("lang", "en-US")
        base_rpr.set("dirty", "0")
    apply_format(base_rpr, run.format, ctx)

    out: list[etree._Element] = []
    segments = clean_text(run.text).split(LINE_BREAK)
    for k, seg in enumerate(segments):
        if k > 0:
            br = etree.Element(qn("a:br"))
            br.append(copy.deepcopy(base_rpr))
            out.append(br)
        if seg == "" and len(segments) > 1:
            continue
        if k == 0 and template is not None:
            el = copy.deepcopy(template)
            for child in list(el):
                if local(child) in ("rPr", "t"):
                    el.remove(child)
        else:
            el = etree.Element(qn("a:r"))
        # rPr must precede pPr (fld) and t
        el.insert(0, copy.deepcopy(base_rpr))
        t = etree.Element(qn("a:t"))
        t.text = seg
        if local(el) == "fld" and el.find("a:pPr", NS) is not None:
            el.find("a:pPr", NS).addnext(t)
        else:
            el.insert(1, t)
        out.append(el)
    return out


def build_paragraph(p: Paragraph, ctx: SlideContext) -> etree._Element:
    if p.origin is not None and paragraph_from_element(p.origin, ctx) == p:
        return copy.deepcopy(p.origin)
    el = etree.Element(qn("a:p"))
    ppr = end = None
    if p.origin is not None:
        if p.origin.find("a:pPr", NS) is not None:
            ppr = copy.deepcopy(p.origin.find("a:pPr", NS))
        if p.origin.find("a:endParaRPr", NS) is not None:
            end = copy.deepcopy(p.origin.find("a:endParaRPr", NS))
    old = paragraph_from_element(p.origin, ctx) if p.origin is not None else Paragraph()
    if p.alignment != old.alignment or p.bullet != old.bullet:
        if ppr is None:
            ppr = etree.Element(qn("a:pPr"))
        if p.alignment != old.alignment:
            if p.alignment is None:
                ppr.attrib.pop("algn", None)
            else:
                ppr.set("algn", _ALIGN_OUT[p.alignment])
        if p.bullet != old.bullet:
            for child in list(ppr):
                if local(child) in _BULLET_TAGS:
                    ppr.remove(child)
            if p.bullet is False:
                insert_ordered(ppr, etree.Element(qn("a:buNone")), _PPR_ORDER)
            elif p.bullet is True:
                bu = etree.Element(qn("a:buChar"))
                bu.set("char", "•")
                insert_ordered(ppr, bu, _PPR_ORDER)
    if ppr is not None:
        el.append(ppr)
    for run in p.runs:
        for child in _build_run(run, ctx):
            el.append(child)
    if end is not None:
        el.append(end)
    return el


def write_paragraphs(tx_body: etree._Element, paragraphs: list[Paragraph], ctx: SlideContext) -> None:
    for child in list(tx_body):
        if local(child) == "p":
            tx_body.remove(child)
    built = [build_paragraph(p, ctx) for p in paragraphs] or [etree.Element(qn("a:p"))]
    for el in built:
        tx_body.append(el)


# -- shapes -----------------------------------------------------------------


def _c_nv_pr(el: etree._Element) -> Optional[etree._Element]:
    return next(el.iter(qn("p:cNvPr")), None)


def _sp_pr(el: etree._Element) -> Optional[etree._Element]:
    tag = local(el)
    if tag in ("sp", "pic", "cxnSp"):
        return el.find("p:spPr", NS)
    if tag == "grpSp":
        return el.find("p:grpSpPr", NS)
    return None


def _xfrm(el: etree._Element) -> Optional[etree._Element]:
    if local(el) == "graphicFrame":
        return el.find("p:xfrm", NS)
    sp_pr = _sp_pr(el)
    return sp_pr.find("a:xfrm", NS) if sp_pr is not None else None


def _box_from_xfrm(xfrm: Optional[etree._Element]) -> Optional[Box]:
    if xfrm is None:
        return None
    off = xfrm.find("a:off", NS)
    ext = xfrm.find("a:ext", NS)
    if off is None or ext is None:
        return None
    return Box(int(off.get("x", 0)), int(off.get("y", 0)), int(ext.get("cx", 0)), int(ext.get("cy", 0)))


def placeholder_info(el: etree._Element) -> Optional[tuple[str, Optional[str]]]:
    ph = next(el.iter(qn("p:ph")), None)
    if ph is None:
        return None
    return ph.get("type", "obj"), ph.get("idx")


def _graphic_uri(el: etree._Element) -> str:
    gd = el.find("a:graphic/a:graphicData", NS)
    return gd.get("uri", "") if gd is not None else ""


def _table_bodies(el: etree._Element) -> list[etree._Element]:
    tbl = el.find("a:graphic/a:graphicData/a:tbl", NS)
    if tbl is None:
        return []
    bodies = []
    for tc in tbl.iter(qn("a:tc")):
        body = tc.find("a:txBody", NS)
        if body is not None:
            bodies.append(body)
    return bodies


def shape_kind(el: etree._Element) -> str:
    tag = local(el)
    if tag == "sp":
        if placeholder_info(el) is not None:
            return "placeholder"
        c_nv = el.find("p:nvSpPr/p:cNvSpPr", NS)
        if c_nv is not None and _BOOL.get(c_nv.get("txBox", "0"), False):
            return "textbox"
        return "autoshape"
    if tag == "pic":
        return "picture"
    if tag == "grpSp":
        return "group"
    if tag == "graphicFrame":
        uri = _graphic_uri(el)
        if uri == URI_TABLE:
            return "table"
        if uri == URI_CHART:
            return "chart"
    return "other"


def shape_from_element(el: etree._Element, ctx: SlideContext, fallback_id: str) -> Shape:
    kind = shape_kind(el)
    c_nv = _c_nv_pr(el)
    shape_id = c_nv.get("id") if c_nv is not None and c_nv.get("id") else fallback_id
    name = c_nv.get("name", "") if c_nv is not None else ""
    ph = placeholder_info(el)

    box = _box_from_xfrm(_xfrm(el))
    if box is None and ph is not None:
        ph_type, idx = ph
        box = ctx.ph_by_idx.get(idx) if idx is not None else None
        if box is None:
            box = ctx.ph_by_type.get(ph_type)
        if box is None and ph_type == "obj":
            box = ctx.ph_by_type.get("body")
    box = copy.copy(box) if box is not None else Box()

    fill = None
    fill_el = find_fill(_sp_pr(el))
    if fill_el is not None:
        fill = fill_from_element(fill_el, ctx)

    text_frame = None
    if kind in ("placeholder", "textbox", "autoshape"):
        body = el.find("p:txBody", NS)
        if body is not None:
            text_frame = TextFrame([paragraph_from_element(p, ctx) for p in body.findall("a:p", NS)])
    elif kind == "table":
        paras = [paragraph_from_element(p, ctx) for b in _table_bodies(el) for p in b.findall("a:p", NS)]
        text_frame = TextFrame(paras)

    image_ref = None
    if kind == "picture":
        blip = next(el.iter(qn("a:blip")), None)
        rid = None
        if blip is not None:
            rid = blip.get(qn("r:embed")) or blip.get(qn("r:link"))
        rel = ctx.rels.get(rid) if rid else None
        image_ref = rel.target if rel is not None else (rid or "")

    return Shape(
        id=shape_id,
        name=name,
        kind=kind,
        box=box,
        fill=fill,
        text_frame=text_frame,
        image_ref=image_ref,
        placeholder=ph[0] if ph else None,
        origin=el,
    )


def _write_box(el: etree._Element, box: Box) -> None:
    xfrm = _xfrm(el)
    if xfrm is None:
        if local(el) == "graphicFrame":
            xfrm = etree.Element(qn("p:xfrm"))
            nv = el.find("p:nvGraphicFramePr", NS)
            if nv is not None:
                nv.addnext(xfrm)
            else:
                el.insert(0, xfrm)
        else:
            sp_pr = _sp_pr(el)
            if sp_pr is None:
                raise ValueError(f"{local(el)} element has no geometry container")
            xfrm = etree.Element(qn("a:xfrm"))
            sp_pr.insert(0, xfrm)
    off = xfrm.find("a:off", NS)
    ext = xfrm.find("a:ext", NS)
    if off is None:
        off = etree.Element(qn("a:off"))
        xfrm.insert(0, off)
    if ext is None:
        ext = etree.Element(qn("a:ext"))
        off.addnext(ext)
    off.set("x", str(box.left_emu))
    off.set("y", str(box.top_emu))
    ext.set("cx", str(box.width_emu))
    ext.set("cy", str(box.height_emu))
    if local(el) == "grpSp" and xfrm.find("a:chOff", NS) is None:
        ch_off = etree.SubElement(xfrm, qn("a:chOff"))
        ch_off.set("x", str(box.left_emu))
        ch_off.set("y", str(box.top_emu))
        ch_ext = etree.SubElement(xfrm, qn("a:chExt"))
        ch_ext.set("cx", str(box.width_emu))
        ch_ext.set("cy", str(box.height_emu))


def can_set_box(shape: Shape) -> bool:
    if shape.origin is None:
        return True
    return local(shape.origin) in ("sp", "pic", "cxnSp", "grpSp", "graphicFrame")


def can_set_fill(shape: Shape) -> bool:
    if shape.origin is None:
        return True
    return local(shape.origin) in ("sp", "pic", "cxnSp", "grpSp")


def build_shape(shape: Shape, ctx: SlideContext) -> etree._Element:
    if shape.origin is None:
        return new_textbox_element(shape, ctx)
    old = shape_from_element(shape.origin, ctx, shape.id)
    if old == shape:
        return copy.deepcopy(shape.origin)
    el = copy.deepcopy(shape.origin)
    if shape.name != old.name:
        c_nv = _c_nv_pr(el)
        if c_nv is not None:
            c_nv.set("name", shape.name)
    if shape.box != old.box:
        _write_box(el, shape.box)
    if shape.fill != old.fill:
        sp_pr = _sp_pr(el)
        if sp_pr is None:
            raise ValueError(f"{shape.kind} shape {shape.id} cannot take a fill")
        replace_fill(sp_pr, shape.fill, _SPPR_ORDER)
    if shape.text_frame != old.text_frame and shape.text_frame is not None:
        if shape.kind == "table":
            _write_table_text(el, shape.text_frame, ctx)
        else:
            body = el.find("p:txBody", NS)
            if body is None:
                body = _new_tx_body()
                el.append(body)
            write_paragraphs(body, shape.text_frame.paragraphs, ctx)
    return el


def _write_table_text(el: etree._Element, frame: TextFrame, ctx: SlideContext) -> None:
    bodies = _table_bodies(el)
    if not bodies:
        return
    counts = [len(b.findall("a:p", NS)) for b in bodies]
    paras = list(frame.paragraphs)
    pos = 0
    for i, body in enumerate(bodies):
        take = counts[i] if i < len(bodies) - 1 else len(paras) - pos
        write_paragraphs(body, paras[pos:pos + take], ctx)
        pos += take


def _new_tx_body() -> etree._Element:
    body = etree.Element(qn("p:txBody"))
    body_pr = etree.SubElement(body, qn("a:bodyPr"))
    body_pr.set("wrap", "square")
    body_pr.set("rtlCol", "0")
    etree.SubElement(body_pr, qn("a:spAutoFit"))
    etree.SubElement(body, qn("a:lstStyle"))
    return body


def new_textbox_element(shape: Shape, ctx: SlideContext) -> etree._Element:
    sp = etree.Element(qn("p:sp"), nsmap={"a": NS["a"], "p": NS["p"]})
    nv = etree.SubElement(sp, qn("p:nvSpPr"))
    c_nv = etree.SubElement(nv, qn("p:cNvPr"))
    c_nv.set("id", shape.id)
    c_nv.set("name", shape.name)
    etree.SubElement(nv, qn("p:cNvSpPr")).set("txBox", "1")
    etree.SubElement(nv, qn("p:nvPr"))
    sp_pr = etree.SubElement(sp, qn("p:spPr"))
    geom = etree.SubElement(sp_pr, qn("a:prstGeom"))
    geom.set("prst", "rect")
    etree.SubElement(geom, qn("a:avLst"))
    _write_box(sp, shape.box)
    if shape.fill is not None:
        replace_fill(sp_pr, shape.fill, _SPPR_ORDER)
    body = _new_tx_body()
    sp.append(body)
    paragraphs = shape.text_frame.paragraphs if shape.text_frame is not None else []
    write_paragraphs(body, paragraphs, ctx)
    return sp


# -- slide level ------------------------------------------------------------


def background_from_csld(c_sld: Optional[etree._Element], ctx: SlideContext) -> Optional[Fill]:
    """The background a cSld declares itself, or None when it inherits one."""
    if c_sld is None:
        return None
    bg = c_sld.find("p:bg", NS)
    if bg is None:
        return None
    bg_pr = bg.find("p:bgPr", NS)
    if bg_pr is not None:
        fill_el = find_fill(bg_pr)
        fill = fill_from_element(fill_el, ctx) if fill_el is not None else None
        return fill or Fill("none")
    bg_ref = bg.find("p:bgRef", NS)
    if bg_ref is not None:
        c = _color_child(bg_ref)
        ph_color = resolve_color(c, ctx) if c is not None else None
        idx = int(bg_ref.get("idx", "0"))
        if idx >= 1001:
            styles, pos = ctx.theme.bg_fill_styles, idx - 1001
        else:
            styles, pos = ctx.theme.fill_styles, idx - 1
        if 0 <= pos < len(styles):
            fill = fill_from_element(styles[pos], ctx, ph_color)
            if fill is not None:
                return fill
        if ph_color is not None:
            return Fill("solid", ph_color)
    return Fill("none")


def write_background(c_sld: etree._Element, fill: Fill) -> None:
    bg = c_sld.find("p:bg", NS)
    if bg is not None:
        c_sld.remove(bg)
    bg = etree.Element(qn("p:bg"))
    bg_pr = etree.SubElement(bg, qn("p:bgPr"))
    bg_pr.append(fill_element(fill))
    etree.SubElement(bg_pr, qn("a:effectLst"))
    c_sld.insert(0, bg)


def transition_label(root: etree._Element) -> Optional[str]:
    trans = root.find("p:transition", NS)
    if trans is None:
        for alt in root.findall("mc:AlternateContent", NS):
            for branch in alt:
                trans = branch.find("p:transition", NS)
                if trans is not None:
                    break
            if trans is not None:
                break
    if trans is None:
        return None
    kids = [c for c in trans if isinstance(c.tag, str) and local(c) not in ("sndAc", "extLst")]
    return local(kids[0]) if kids else "default"


SHAPE_CONTAINER_SKIP = {"nvGrpSpPr", "grpSpPr", "extLst"}


def tree_shape_elements(sp_tree: etree._Element) -> list[etree._Element]:
    return [c for c in sp_tree if isinstance(c.tag, str) and local(c) not in SHAPE_CONTAINER_SKIP]


def notes_text_from_xml(root: etree._Element) -> str:
    ctx = SlideContext(part=None)
    for sp in root.iter(qn("p:sp")):
        info = placeholder_info(sp)
        if info is not None and info[0] == "body":
            body = sp.find("p:txBody", NS)
            if body is None:
                return ""
            paras = [paragraph_from_element(p, ctx) for p in body.findall("a:p", NS)]
            return "\n".join(p.text for p in paras)
    return ""


def write_notes_text(root: etree._Element, text: str) -> None:
    for sp in root.iter(qn("p:sp")):
        info = placeholder_info(sp)
        if info is not None and info[0] == "body":
            body = sp.find("p:txBody", NS)
            if body is None:
                body = _new_tx_body()
                sp.append(body)
            ctx = SlideContext(part=None)
            lines = text.split("\n")
            write_paragraphs(body, [Paragraph([Run(line)] if line else []) for line in lines], ctx)
            return
    raise ValueError("notes page has no body placeholder")


def new_notes_xml(text: str) -> bytes:
    a, p, r = NS["a"], NS["p"], NS["r"]
    xml = f"""<p:notes xmlns:a="{a}" xmlns:p="{p}" xmlns:r="{r}"><p:cSld><p:spTree>
<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>
<p:grpSpPr/>
<p:sp><p:nvSpPr><p:cNvPr id="2" name="Slide Image Placeholder 1"/><p:cNvSpPr><a:spLocks noGrp="1" noRot="1" noChangeAspect="1"/></p:cNvSpPr><p:nvPr><p:ph type="sldImg"/></p:nvPr></p:nvSpPr><p:spPr/></p:sp>
<p:sp><p:nvSpPr><p:cNvPr id="3" name="Notes Placeholder 2"/><p:cNvSpPr><a:spLocks noGrp="1"/></p:cNvSpPr><p:nvPr><p:ph type="body" idx="1"/></p:nvPr></p:nvSpPr><p:spPr/><p:txBody><a:bodyPr/><a:lstStyle/><a:p/></p:txBody></p:sp>
</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:notes>"""
    root = parse_xml(xml.replace("\n", "").encode())
    write_notes_text(root, text)
    return serialize(root)


def new_notes_master_xml(slide_cx: int, slide_cy: int) -> bytes:
    """A bare notes master: slide image above, notes body below, portrait page."""
    a, p, r = NS["a"], NS["p"], NS["r"]
    page_cx, page_cy = 6858000, 9144000
    img_cx = page_cx - 2 * 685800
    img_cy = img_cx * slide_cy // slide_cx if slide_cx else img_cx * 3 // 4
    body_y = 685800 + img_cy + 457200
    xml = (
        f'<p:notesMaster xmlns:a="{a}" xmlns:p="{p}" xmlns:r="{r}"><p:cSld>'
        '<p:bg><p:bgRef idx="1001"><a:schemeClr val="bg1"/></p:bgRef></p:bg><p:spTree>'
        '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
        '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/>'
        '<a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>'
        '<p:sp><p:nvSpPr><p:cNvPr id="2" name="Slide Image Placeholder 1"/><p:cNvSpPr>'
        '<a:spLocks noGrp="1" noRot="1" noChangeAspect="1"/></p:cNvSpPr>'
        '<p:nvPr><p:ph type="sldImg" idx="2"/></p:nvPr></p:nvSpPr>'
        f'<p:spPr><a:xfrm><a:off x="685800" y="685800"/><a:ext cx="{img_cx}" cy="{img_cy}"/></a:xfrm>'
        '<a:prstGeom prst="rect"><a:avLst/></a:prstGeom><a:noFill/></p:spPr></p:sp>'
        '<p:sp><p:nvSpPr><p:cNvPr id="3" name="Notes Placeholder 2"/><p:cNvSpPr>'
        '<a:spLocks noGrp="1"/></p:cNvSpPr><p:nvPr><p:ph type="body" sz="quarter" idx="3"/></p:nvPr></p:nvSpPr>'
        f'<p:spPr><a:xfrm><a:off x="685800" y="{body_y}"/>'
        f'<a:ext cx="{img_cx}" cy="{max(page_cy - body_y - 685800, 914400)}"/></a:xfrm>'
        '<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr>'
        '<p:txBody><a:bodyPr/><a:lstStyle/><a:p><a:endParaRPr lang="en-US"/></a:p></p:txBody></p:sp>'
        '</p:spTree></p:cSld>'
        '<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" '
        'accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" '
        'hlink="hlink" folHlink="folHlink"/>'
        '<p:notesStyle><a:lvl1pPr marL="0" algn="l"><a:defRPr sz="1200"><a:solidFill>'
        '<a:schemeClr val="tx1"/></a:solidFill><a:latin typeface="+mn-lt"/></a:defRPr></a:lvl1pPr>'
        '</p:notesStyle></p:notesMaster>'
    )
    return serialize(parse_xml(xml.encode()))


def new_slide_xml(layout_root: Optional[etree._Element]) -> etree._Element:
    """A slide carrying empty copies of the layout's content placeholders."""
    a, p, r = NS["a"], NS["p"], NS["r"]
    xml = (
        f'<p:sld xmlns:a="{a}" xmlns:p="{p}" xmlns:r="{r}"><p:cSld><p:spTree>'
        '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
        '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/>'
        '<a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>'
        "</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>"
    )
    root = parse_xml(xml.encode())
    if layout_root is None:
        return root
    sp_tree = root.find("p:cSld/p:spTree", NS)
    next_id = 2
    layout_tree = layout_root.find("p:cSld/p:spTree", NS)
    for el in layout_tree.findall("p:sp", NS) if layout_tree is not None else []:
        info = placeholder_info(el)
        if info is None or info[0] in ("dt", "ftr", "sldNum", "hdr"):
            continue
        src_nv = el.find("p:nvSpPr", NS)
        sp = etree.SubElement(sp_tree, qn("p:sp"))
        nv = etree.SubElement(sp, qn("p:nvSpPr"))
        c_nv = etree.SubElement(nv, qn("p:cNvPr"))
        c_nv.set("id", str(next_id))
        c_nv.set("name", src_nv.find("p:cNvPr", NS).get("name", f"Placeholder {next_id - 1}"))
        c_nv_sp = etree.SubElement(nv, qn("p:cNvSpPr"))
        etree.SubElement(c_nv_sp, qn("a:spLocks")).set("noGrp", "1")
        nv_pr = etree.SubElement(nv, qn("p:nvPr"))
        nv_pr.append(copy.deepcopy(src_nv.find("p:nvPr/p:ph", NS)))
        etree.SubElement(sp, qn("p:spPr"))
        body = etree.SubElement(sp, qn("p:txBody"))
        etree.SubElement(body, qn("a:bodyPr"))
        etree.SubElement(body, qn("a:lstStyle"))
        etree.SubElement(body, qn("a:p"))
        next_id += 1
    return root
