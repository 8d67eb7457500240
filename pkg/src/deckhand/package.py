"""Load and save PPTX packages.

Slides, their relationship parts, notes slides and the presentation
part are modeled; every other part is kept as opaque bytes and written
back untouched.
"""
from __future__ import annotations

import io
import logging
import os
import re
import zipfile
from dataclasses import dataclass, field, replace
from typing import BinaryIO, Optional, Union

from lxml import etree

from . import ooxml as ox
from .errors import DeckIOError, MalformedPackage, MalformedXml, NotAZip
from .model import Deck, Fill, Slide

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


@dataclass(frozen=True)
class SlideOrigin:
    ctx: ox.SlideContext
    xml: bytes
    part: Optional[str] = None
    sld_id: Optional[int] = None
    rid: Optional[str] = None
    rels: Optional[bytes] = None
    notes_part: Optional[str] = None
    notes_xml: Optional[bytes] = None
    notes_rels: Optional[bytes] = None
    # set for duplicated or newly added slides: they need fresh part names
    fresh: bool = False

    def __deepcopy__(self, memo):
        return self


@dataclass(frozen=True)
class PackageOrigin:
    part_order: tuple
    content_types: bytes
    pres_part: str
    pres_xml: bytes
    pres_rels: bytes
    modeled: frozenset
    layouts: dict = field(default_factory=dict)  # layout name -> (part, ctx, xml bytes)
    notes_master: Optional[str] = None

    def __deepcopy__(self, memo):
        return self


def _parse(part: str, data: bytes) -> etree._Element:
    try:
        return ox.parse_xml(data)
    except etree.XMLSyntaxError as exc:
        raise MalformedXml(part, str(exc)) from None


class _Reader:
    def __init__(self, parts: dict[str, bytes]):
        self.parts = parts
        self._layout_cache: dict[str, ox.SlideContext] = {}
        self._theme_cache: dict[str, ox.Theme] = {}

    def get(self, part: Optional[str]) -> Optional[bytes]:
        return self.parts.get(part) if part else None

    def rels(self, part: str) -> dict[str, ox.Relationship]:
        data = self.get(ox.rels_part_for(part))
        if data is None:
            return {}
        try:
            return ox.read_rels(data, part)
        except etree.XMLSyntaxError as exc:
            raise MalformedXml(ox.rels_part_for(part), str(exc)) from None

    @staticmethod
    def first(rels: dict, rel_type: str) -> Optional[str]:
        for rel in rels.values():
            if rel.type == rel_type and not rel.external:
                return rel.target
        return None

    def theme(self, part: Optional[str]) -> ox.Theme:
        if part is None:
            return ox.Theme()
        if part not in self._theme_cache:
            data = self.get(part)
            self._theme_cache[part] = ox.read_theme(data) if data else ox.Theme()
        return self._theme_cache[part]

    def layout_context(self, layout_part: Optional[str]) -> ox.SlideContext:
        """Context shared by all slides on one layout (``part``/``rels`` unset)."""
        if layout_part in self._layout_cache:
            return self._layout_cache[layout_part]
        ctx = ox.SlideContext(part=None, layout_part=layout_part)
        layout_xml = self.get(layout_part)
        if layout_xml is None:
            self._layout_cache[layout_part] = ctx
            return ctx
        layout_root = _parse(layout_part, layout_xml)
        c_sld = layout_root.find("p:cSld", ox.NS)
        ctx.layout_name = c_sld.get("name", "") if c_sld is not None else ""
        master_part = self.first(self.rels(layout_part), ox.RT_SLIDE_MASTER)
        master_root = None
        if self.get(master_part) is not None:
            master_root = _parse(master_part, self.get(master_part))
            ctx.theme = self.theme(self.first(self.rels(master_part), ox.RT_THEME))
            clr_map = master_root.find("p:clrMap", ox.NS)
            if clr_map is not None:
                ctx.clr_map = dict(clr_map.attrib)
        for root, by_type_only in ((master_root, True), (layout_root, False)):
            tree = root.find("p:cSld/p:spTree", ox.NS) if root is not None else None
            if tree is None:
                continue
            for el in tree:
                info = ox.placeholder_info(el) if isinstance(el.tag, str) else None
                box = ox._box_from_xfrm(ox._xfrm(el)) if info else None
                if box is None:
                    continue
                ph_type, idx = info
                ctx.ph_by_type[ph_type] = box
                if idx is not None and not by_type_only:
                    ctx.ph_by_idx[idx] = box
        bg = ox.background_from_csld(c_sld, ctx)
        if bg is None and master_root is not None:
            bg = ox.background_from_csld(master_root.find("p:cSld", ox.NS), ctx)
        ctx.inherited_background = bg or Fill("none")
        self._layout_cache[layout_part] = ctx
        return ctx

    def slide_context(self, part: str, root: etree._Element) -> ox.SlideContext:
        rels = self.rels(part)
        base = self.layout_context(self.first(rels, ox.RT_SLIDE_LAYOUT))
        ctx = replace(base, part=part, rels=rels)
        override = root.find("p:clrMapOvr/a:overrideClrMapping", ox.NS)
        if override is not None:
            ctx.clr_map = dict(override.attrib)
        return ctx


def parse_slide(root: etree._Element, ctx: ox.SlideContext, index: int, notes_text: str = "",
                origin: Optional[SlideOrigin] = None) -> Slide:
    c_sld = root.find("p:cSld", ox.NS)
    background = ox.background_from_csld(c_sld, ctx) or ctx.inherited_background
    shapes = []
    seen: set[str] = set()
    tree = c_sld.find("p:spTree", ox.NS) if c_sld is not None else None
    for n, el in enumerate(ox.tree_shape_elements(tree) if tree is not None else []):
        shape = ox.shape_from_element(el, ctx, fallback_id=f"x{n}")
        if shape.id in seen:
            k = 2
            while f"{shape.id}~{k}" in seen:
                k += 1
            log.warning("duplicate shape id %s on slide %d", shape.id, index)
            shape.id = f"{shape.id}~{k}"
        seen.add(shape.id)
        shapes.append(shape)
    return Slide(
        index=index,
        layout_name=ctx.layout_name,
        background=background,
        transition=ox.transition_label(root),
        shapes=shapes,
        notes_text=notes_text,
        origin=origin,
    )


def read_deck(source: Union[PathLike, bytes, BinaryIO]) -> Deck:
    """Load a deck from a path, raw bytes, or a binary file object."""
    path = None
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    elif isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        if not os.path.exists(path):
            raise DeckIOError(f"no such file: {path}")
    try:
        with zipfile.ZipFile(source) as zf:
            order = tuple(info.filename for info in zf.infolist() if not info.is_dir())
            parts = {name: zf.read(name) for name in order}
    except zipfile.BadZipFile:
        raise NotAZip(f"{path or 'input'} is not a ZIP archive") from None
    except OSError as exc:
        raise DeckIOError(str(exc)) from exc

    if "[Content_Types].xml" not in parts:
        raise MalformedPackage("missing [Content_Types].xml")
    reader = _Reader(parts)
    pkg_rels = ox.read_rels(parts.get("_rels/.rels"), "") if "_rels/.rels" in parts else {}
    pres_part = reader.first(pkg_rels, ox.RT_OFFICE_DOCUMENT) or "ppt/presentation.xml"
    if pres_part not in parts:
        raise MalformedPackage(f"missing presentation part {pres_part}")
    pres_root = _parse(pres_part, parts[pres_part])
    pres_rels_part = ox.rels_part_for(pres_part)
    pres_rels = reader.rels(pres_part)

    size = pres_root.find("p:sldSz", ox.NS)
    width = int(size.get("cx")) if size is not None else 0
    height = int(size.get("cy")) if size is not None else 0

    modeled = {"[Content_Types].xml", pres_part, pres_rels_part}
    slides = []
    id_list = pres_root.find("p:sldIdLst", ox.NS)
    for sld in id_list if id_list is not None else []:
        if not isinstance(sld.tag, str):
            continue
        rid = sld.get(ox.qn("r:id"))
        rel = pres_rels.get(rid)
        if rel is None or rel.target not in parts:
            raise MalformedPackage(f"slide relationship {rid} has no target part")
        part = rel.target
        xml = parts[part]
        root = _parse(part, xml)
        ctx = reader.slide_context(part, root)
        rels_part = ox.rels_part_for(part)
        notes_part = reader.first(ctx.rels, ox.RT_NOTES_SLIDE)
        notes_xml = parts.get(notes_part) if notes_part else None
        notes_text = ""
        if notes_xml is not None:
            notes_text = ox.notes_text_from_xml(_parse(notes_part, notes_xml))
            modeled.update({notes_part, ox.rels_part_for(notes_part)})
        else:
            notes_part = None
        modeled.update({part, rels_part})
        origin = SlideOrigin(
            ctx=ctx,
            xml=xml,
            part=part,
            sld_id=int(sld.get("id")),
            rid=rid,
            rels=parts.get(rels_part),
            notes_part=notes_part,
            notes_xml=notes_xml,
            notes_rels=parts.get(ox.rels_part_for(notes_part)) if notes_part else None,
        )
        slides.append(parse_slide(root, ctx, len(slides) + 1, notes_text, origin))

    layouts: dict[str, tuple] = {}
    for name in order:
        if re.fullmatch(r"ppt/slideLayouts/[^/]+\.xml", name):
            ctx = reader.layout_context(name)
            if ctx.layout_name and ctx.layout_name not in layouts:
                layouts[ctx.layout_name] = (name, ctx, parts[name])
    notes_master = reader.first(pres_rels, ox.RT_NOTES_MASTER)

    modeled = frozenset(m for m in modeled if m in parts)
    origin = PackageOrigin(
        part_order=order,
        content_types=parts["[Content_Types].xml"],
        pres_part=pres_part,
        pres_xml=parts[pres_part],
        pres_rels=parts.get(pres_rels_part, b""),
        modeled=modeled,
        layouts=layouts,
        notes_master=notes_master,
    )
    return Deck(
        slides=slides,
        slide_width_emu=width,
        slide_height_emu=height,
        source_path=path,
        opaque_parts={n: parts[n] for n in order if n not in modeled},
        origin=origin,
    )


def load_deck(path: PathLike) -> Deck:
    return read_deck(path)


def layout_names(deck: Deck) -> list[str]:
    return list(deck.origin.layouts) if deck.origin is not None else []


def has_notes_master(deck: Deck) -> bool:
    return deck.origin is not None and deck.origin.notes_master is not None


def can_hold_notes(deck: Deck) -> bool:
    """True when notes pages can be written: a notes master exists or can be made."""
    if deck.origin is None:
        return False
    return deck.origin.notes_master is not None or _theme_part(deck) is not None


def _theme_part(deck: Deck) -> Optional[str]:
    themes = sorted(n for n in deck.opaque_parts if re.fullmatch(r"ppt/theme/[^/]+\.xml", n))
    return themes[0] if themes else None


def _add_notes_master(deck: Deck, out: dict, taken: set, ct_root, pres_rels: dict) -> tuple[str, str]:
    """Create a minimal notes master (with its own theme copy); returns (part, rId)."""
    theme_src = _theme_part(deck)
    if theme_src is None:
        raise ValueError("deck has no theme to base a notes master on")
    master = _fresh_name("ppt/notesMasters/notesMaster{}.xml", taken)
    theme = _fresh_name("ppt/theme/theme{}.xml", taken)
    out[theme] = deck.opaque_parts[theme_src]
    out[master] = ox.new_notes_master_xml(deck.slide_width_emu, deck.slide_height_emu)
    out[ox.rels_part_for(master)] = ox.build_rels(master, [ox.Relationship("rId1", ox.RT_THEME, theme)])
    _add_override(ct_root, master, ox.CT_NOTES_MASTER)
    _add_override(ct_root, theme, ox.CT_THEME)
    rid = ox.next_rid(pres_rels)
    pres_rels[rid] = ox.Relationship(rid, ox.RT_NOTES_MASTER, master)
    return master, rid


def slide_from_layout(deck: Deck, layout_name: str, index: int) -> Slide:
    """A new slide on ``layout_name`` with empty copies of its placeholders."""
    if deck.origin is None or layout_name not in deck.origin.layouts:
        raise KeyError(layout_name)
    layout_part, base, layout_xml = deck.origin.layouts[layout_name]
    rels = {"rId1": ox.Relationship("rId1", ox.RT_SLIDE_LAYOUT, layout_part)}
    ctx = replace(base, rels=rels)
    root = ox.new_slide_xml(ox.parse_xml(layout_xml))
    origin = SlideOrigin(ctx=ctx, xml=ox.serialize(root), fresh=True,
                         rels=ox.build_rels("ppt/slides/new.xml", rels.values()))
    return parse_slide(root, ctx, index, "", origin)


# -- writing ----------------------------------------------------------------


def _slide_equal(a: Slide, b: Slide) -> bool:
    return (a.background, a.transition, a.shapes, a.layout_name) == (
        b.background, b.transition, b.shapes, b.layout_name)


def _render_slide(slide: Slide, origin: SlideOrigin) -> tuple[bytes, bool]:
    """Serialize ``slide``; returns (xml, changed)."""
    ctx = origin.ctx
    root = ox.parse_xml(origin.xml)
    baseline = parse_slide(root, ctx, slide.index)
    if _slide_equal(baseline, slide):
        return origin.xml, False
    c_sld = root.find("p:cSld", ox.NS)
    tree = c_sld.find("p:spTree", ox.NS)
    head = [c for c in tree if isinstance(c.tag, str) and ox.local(c) in ("nvGrpSpPr", "grpSpPr")]
    tail = [c for c in tree if isinstance(c.tag, str) and ox.local(c) == "extLst"]
    for child in list(tree):
        tree.remove(child)
    for el in head:
        tree.append(el)
    for shape in slide.shapes:
        tree.append(ox.build_shape(shape, ctx))
    for el in tail:
        tree.append(el)
    if slide.background != baseline.background:
        ox.write_background(c_sld, slide.background)
    return ox.serialize(root), True


def _fresh_name(pattern: str, taken: set[str]) -> str:
    n = 1
    while pattern.format(n) in taken:
        n += 1
    name = pattern.format(n)
    taken.add(name)
    return name


def deck_to_bytes(deck: Deck) -> bytes:
    if deck.origin is None:
        raise ValueError("deck was not loaded from a package and cannot be saved")
    pkg: PackageOrigin = deck.origin
    out: dict[str, bytes] = dict(deck.opaque_parts)
    taken = set(pkg.part_order) | set(out)
    claimed: set[str] = set()

    ct_root = ox.parse_xml(pkg.content_types)
    ct_changed = False
    pres_rels = ox.read_rels(pkg.pres_rels, pkg.pres_part) if pkg.pres_rels else {}
    used_ids = [s.origin.sld_id for s in deck.slides if s.origin and s.origin.sld_id]
    next_id = max([255, *used_ids, *_all_sld_ids(pkg.pres_xml)]) + 1

    notes_master, notes_master_rid = pkg.notes_master, None
    if notes_master is None and any(
            s.notes_text and s.origin is not None and s.origin.notes_xml is None for s in deck.slides):
        notes_master, notes_master_rid = _add_notes_master(deck, out, taken, ct_root, pres_rels)
        ct_changed = True

    entries = []  # (sld_id, rid, part) in presentation order
    written_slide_parts = set()
    written_notes_parts = set()
    for slide in deck.slides:
        so: SlideOrigin = slide.origin
        if so is None:
            raise ValueError(f"slide {slide.index} has no origin and cannot be written")
        keep = so.part is not None and not so.fresh and so.part not in claimed
        if keep:
            part, sld_id, rid = so.part, so.sld_id, so.rid
            claimed.add(part)
        else:
            part = _fresh_name("ppt/slides/slide{}.xml", taken)
            sld_id, next_id = next_id, next_id + 1
            rid = ox.next_rid(pres_rels)
            pres_rels[rid] = ox.Relationship(rid, ox.RT_SLIDE, part)
            _add_override(ct_root, part, ox.CT_SLIDE)
            ct_changed = True
        entries.append((sld_id, rid, part))
        written_slide_parts.add(part)

        xml, _ = _render_slide(slide, so)
        out[part] = xml
        rels = dict(ox.read_rels(so.rels, part)) if so.rels else {}
        rels_changed = not keep

        # notes
        original_notes = (ox.notes_text_from_xml(ox.parse_xml(so.notes_xml))
                          if so.notes_xml is not None else None)
        notes_part = None
        if so.notes_xml is not None or slide.notes_text:
            if keep and so.notes_part and original_notes == slide.notes_text:
                notes_part = so.notes_part
                out[notes_part] = so.notes_xml
                if so.notes_rels is not None:
                    out[ox.rels_part_for(notes_part)] = so.notes_rels
            else:
                if keep and so.notes_part:
                    notes_part = so.notes_part
                else:
                    notes_part = _fresh_name("ppt/notesSlides/notesSlide{}.xml", taken)
                    _add_override(ct_root, notes_part, ox.CT_NOTES)
                    ct_changed = True
                if so.notes_xml is not None:
                    root = ox.parse_xml(so.notes_xml)
                    ox.write_notes_text(root, slide.notes_text)
                    out[notes_part] = ox.serialize(root)
                else:
                    out[notes_part] = ox.new_notes_xml(slide.notes_text)
                notes_rels = [ox.Relationship("rId2", ox.RT_SLIDE, part)]
                if notes_master:
                    notes_rels.insert(0, ox.Relationship("rId1", ox.RT_NOTES_MASTER, notes_master))
                elif so.notes_xml is None:
                    raise ValueError("deck has no notes master; cannot create a notes page")
                if so.notes_rels is not None:
                    kept = [r for r in ox.read_rels(so.notes_rels, notes_part).values()
                            if r.type != ox.RT_SLIDE]
                    notes_rels = kept + [ox.Relationship(ox.next_rid(r.rid for r in kept),
                                                         ox.RT_SLIDE, part)]
                out[ox.rels_part_for(notes_part)] = ox.build_rels(notes_part, notes_rels)
            written_notes_parts.add(notes_part)
        # point the slide at its notes part
        old_notes_rel = next((r for r in rels.values() if r.type == ox.RT_NOTES_SLIDE), None)
        if notes_part is None and old_notes_rel is not None:
            del rels[old_notes_rel.rid]
            rels_changed = True
        elif notes_part is not None and (old_notes_rel is None or old_notes_rel.target != notes_part):
            rid_n = old_notes_rel.rid if old_notes_rel else ox.next_rid(rels)
            rels[rid_n] = ox.Relationship(rid_n, ox.RT_NOTES_SLIDE, notes_part)
            rels_changed = True
        rels_part = ox.rels_part_for(part)
        if rels_changed:
            out[rels_part] = ox.build_rels(part, rels.values())
        elif so.rels is not None:
            out[rels_part] = so.rels

    # drop overrides for modeled parts that are gone
    gone = {p for p in pkg.modeled if p.startswith(("ppt/slides/", "ppt/notesSlides/"))
            and not p.endswith(".rels")} - written_slide_parts - written_notes_parts
    for name in gone:
        ct_changed |= _remove_override(ct_root, name)

    original_entries = _sld_entries(pkg.pres_xml)
    size_changed = _sld_size(pkg.pres_xml) != (deck.slide_width_emu, deck.slide_height_emu)
    if [(e[0], e[1]) for e in entries] != original_entries or size_changed or notes_master_rid:
        for rid, rel in list(pres_rels.items()):
            if rel.type == ox.RT_SLIDE and rel.target not in written_slide_parts:
                del pres_rels[rid]
        out[pkg.pres_part] = _rewrite_presentation(pkg.pres_xml, entries, deck, notes_master_rid)
        out[ox.rels_part_for(pkg.pres_part)] = ox.build_rels(pkg.pres_part, pres_rels.values())
    else:
        out[pkg.pres_part] = pkg.pres_xml
        if pkg.pres_rels:
            out[ox.rels_part_for(pkg.pres_part)] = pkg.pres_rels
    out["[Content_Types].xml"] = ox.serialize(ct_root) if ct_changed else pkg.content_types

    order = ["[Content_Types].xml"]
    order += [n for n in pkg.part_order if n in out and n != "[Content_Types].xml"]
    order += [n for n in out if n not in set(order)]
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for name in order:
            zf.writestr(name, out[name])
    return buf.getvalue()


def save_deck(deck: Deck, path: PathLike) -> None:
    data = deck_to_bytes(deck)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise DeckIOError(f"cannot write {os.fspath(path)}: {exc}") from exc


def _all_sld_ids(pres_xml: bytes) -> list[int]:
    root = ox.parse_xml(pres_xml)
    return [int(e.get("id")) for e in root.iter(ox.qn("p:sldId")) if e.get("id")]


def _sld_entries(pres_xml: bytes) -> list[tuple]:
    root = ox.parse_xml(pres_xml)
    id_list = root.find("p:sldIdLst", ox.NS)
    return [(int(e.get("id")), e.get(ox.qn("r:id")))
            for e in (id_list if id_list is not None else []) if isinstance(e.tag, str)]


def _sld_size(pres_xml: bytes) -> tuple[int, int]:
    size = ox.parse_xml(pres_xml).find("p:sldSz", ox.NS)
    return (int(size.get("cx")), int(size.get("cy"))) if size is not None else (0, 0)


def _rewrite_presentation(pres_xml: bytes, entries: list, deck: Deck,
                          notes_master_rid: Optional[str] = None) -> bytes:
    root = ox.parse_xml(pres_xml)
    if notes_master_rid is not None:
        lst = etree.Element(ox.qn("p:notesMasterIdLst"))
        etree.SubElement(lst, ox.qn("p:notesMasterId")).set(ox.qn("r:id"), notes_master_rid)
        root.find("p:sldMasterIdLst", ox.NS).addnext(lst)
    id_list = root.find("p:sldIdLst", ox.NS)
    if id_list is None:
        id_list = etree.Element(ox.qn("p:sldIdLst"))
        anchor = root.find("p:notesMasterIdLst", ox.NS)
        if anchor is None:
            anchor = root.find("p:sldMasterIdLst", ox.NS)
        anchor.addnext(id_list)
    for child in list(id_list):
        id_list.remove(child)
    for sld_id, rid, _ in entries:
        el = etree.SubElement(id_list, ox.qn("p:sldId"))
        el.set("id", str(sld_id))
        el.set(ox.qn("r:id"), rid)
    if not len(id_list):
        root.remove(id_list)

    size = root.find("p:sldSz", ox.NS)
    if size is not None:
        size.set("cx", str(deck.slide_width_emu))
        size.set("cy", str(deck.slide_height_emu))

    # keep section lists consistent with the slide list
    new_ids = [e[0] for e in entries]
    live = set(new_ids)
    sections = list(root.iter(f"{{{ox.P14}}}section"))
    if sections:
        placed = set()
        for section in sections:
            lst = section.find(f"{{{ox.P14}}}sldIdLst")
            if lst is None:
                continue
            for el in list(lst):
                sid = int(el.get("id"))
                if sid not in live:
                    lst.remove(el)
                else:
                    placed.add(sid)
        for pos, sid in enumerate(new_ids):
            if sid in placed:
                continue
            prev = new_ids[pos - 1] if pos > 0 else None
            target = None
            for section in sections:
                lst = section.find(f"{{{ox.P14}}}sldIdLst")
                for el in lst if lst is not None else []:
                    if prev is not None and int(el.get("id")) == prev:
                        target = el
            new_el = etree.Element(f"{{{ox.P14}}}sldId")
            new_el.set("id", str(sid))
            if target is not None:
                target.addnext(new_el)
            else:
                lst = sections[0].find(f"{{{ox.P14}}}sldIdLst")
                if lst is None:
                    lst = etree.SubElement(sections[0], f"{{{ox.P14}}}sldIdLst")
                lst.insert(0, new_el)
            placed.add(sid)
    return ox.serialize(root)


def _add_override(ct_root: etree._Element, part: str, content_type: str) -> None:
    el = etree.SubElement(ct_root, f"{{{ox.CONTENT_TYPES}}}Override")
    el.set("PartName", "/" + part)
    el.set("ContentType", content_type)


def _remove_override(ct_root: etree._Element, part: str) -> bool:
    for el in ct_root:
        if isinstance(el.tag, str) and ox.local(el) == "Override" and el.get("PartName") == "/" + part:
            ct_root.remove(el)
            return True
    return False
