"""Run-granular in-memory model of a slide deck.

Every modeled node may carry an ``origin``: the XML element it was read
from. Origins never take part in equality; the writer uses them as
templates so that attributes the model does not cover survive an edit.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from typing import Any, Literal, Optional

from .errors import Ambiguous, NotFound

EMU_PER_INCH = 914_400
MAX_RGB = 0xFFFFFF

ShapeKind = Literal[
    "textbox", "placeholder", "picture", "autoshape", "table", "chart", "group", "other"
]
SHAPE_KINDS: tuple[str, ...] = (
    "textbox", "placeholder", "picture", "autoshape", "table", "chart", "group", "other",
)
TEXT_KINDS = frozenset({"textbox", "placeholder", "autoshape", "table"})
FillKind = Literal["none", "solid", "gradient", "picture"]
FILL_KINDS: tuple[str, ...] = ("none", "solid", "gradient", "picture")
Alignment = Literal["left", "center", "right", "justify"]
ALIGNMENTS: tuple[str, ...] = ("left", "center", "right", "justify")

# PowerPoint's in-paragraph line break character.
LINE_BREAK = "\x0b"


@dataclass
class Fill:
    kind: FillKind = "none"
    color_rgb: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in FILL_KINDS:
            raise ValueError(f"unknown fill kind {self.kind!r}")
        if (self.kind == "solid") != (self.color_rgb is not None):
            raise ValueError("color_rgb is required exactly when kind is 'solid'")
        if self.color_rgb is not None and not 0 <= self.color_rgb <= MAX_RGB:
            raise ValueError(f"color {self.color_rgb:#x} exceeds 24 bits")


@dataclass
class Box:
    left_emu: int = 0
    top_emu: int = 0
    width_emu: int = 0
    height_emu: int = 0

    def __post_init__(self) -> None:
        if self.width_emu < 0 or self.height_emu < 0:
            raise ValueError("box extents must be non-negative")


@dataclass
class RunFormat:
    font_name: Optional[str] = None
    size_points: Optional[float] = None
    bold: Optional[bool] = None
    italic: Optional[bool] = None
    underline: Optional[bool] = None
    color_rgb: Optional[int] = None

    def __post_init__(self) -> None:
        if self.color_rgb is not None and not 0 <= self.color_rgb <= MAX_RGB:
            raise ValueError(f"color {self.color_rgb:#x} exceeds 24 bits")
        if self.size_points is not None and self.size_points <= 0:
            raise ValueError("size_points must be positive")


@dataclass
class Run:
    text: str = ""
    format: RunFormat = field(default_factory=RunFormat)
    origin: Any = field(default=None, compare=False, repr=False)


@dataclass
class Paragraph:
    runs: list[Run] = field(default_factory=list)
    alignment: Optional[Alignment] = None
    bullet: Optional[bool] = None
    origin: Any = field(default=None, compare=False, repr=False)

    @property
    def text(self) -> str:
        return paragraph_text(self)


@dataclass
class TextFrame:
    paragraphs: list[Paragraph] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n".join(paragraph_text(p) for p in self.paragraphs)


@dataclass
class Shape:
    id: str
    name: str
    kind: ShapeKind
    box: Box = field(default_factory=Box)
    fill: Optional[Fill] = None
    text_frame: Optional[TextFrame] = None
    image_ref: Optional[str] = None
    # Placeholder role ("title", "body", ...) as read from the file.
    placeholder: Optional[str] = field(default=None, compare=False)
    origin: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.kind == "picture" and self.image_ref is None:
            raise ValueError("picture shapes need an image_ref")
        if self.text_frame is not None and self.kind not in TEXT_KINDS:
            raise ValueError(f"{self.kind} shapes cannot carry text")


@dataclass
class Slide:
    index: int
    layout_name: str = ""
    background: Fill = field(default_factory=Fill)
    transition: Optional[str] = None
    shapes: list[Shape] = field(default_factory=list)
    notes_text: str = ""
    origin: Any = field(default=None, compare=False, repr=False)

    def shape_ids(self) -> list[str]:
        return [s.id for s in self.shapes]


@dataclass
class Deck:
    slides: list[Slide] = field(default_factory=list)
    slide_width_emu: int = 0
    slide_height_emu: int = 0
    source_path: Optional[str] = field(default=None, compare=False)
    opaque_parts: dict[str, bytes] = field(default_factory=dict)
    origin: Any = field(default=None, compare=False, repr=False)

    @property
    def slide_count(self) -> int:
        return len(self.slides)

    def slide(self, index: int) -> Slide:
        """Return slide ``index`` (1-based)."""
        from .errors import SlideOutOfRange

        if not 1 <= index <= len(self.slides):
            raise SlideOutOfRange(f"slide {index} not in 1..{len(self.slides)}")
        return self.slides[index - 1]

    def copy(self) -> "Deck":
        """Deep copy of the slides; opaque part bytes are shared (immutable)."""
        return replace(
            self,
            slides=copy.deepcopy(self.slides),
            opaque_parts=dict(self.opaque_parts),
        )

    def renumber(self) -> None:
        for i, s in enumerate(self.slides, start=1):
            s.index = i


def paragraph_text(p: Paragraph) -> str:
    return "".join(r.text for r in p.runs)


def normalize_runs(p: Paragraph) -> Paragraph:
    """Return a copy of ``p`` with empty runs dropped and equal-format neighbours merged.

    A merged run keeps the origin of its first constituent.
    """
    merged: list[Run] = []
    for run in p.runs:
        if run.text == "":
            continue
        if merged and merged[-1].format == run.format:
            last = merged[-1]
            merged[-1] = Run(last.text + run.text, last.format, last.origin)
        else:
            merged.append(Run(run.text, copy.copy(run.format), run.origin))
    return Paragraph(merged, p.alignment, p.bullet, p.origin)


def find_shape(slide: Slide, selector: str) -> Shape:
    """Resolve ``selector`` against shape ids first, then names."""
    for shape in slide.shapes:
        if shape.id == selector:
            return shape
    named = [s for s in slide.shapes if s.name == selector]
    if not named:
        raise NotFound(f"no shape {selector!r} on slide {slide.index}")
    if len(named) > 1:
        raise Ambiguous(
            f"{len(named)} shapes named {selector!r} on slide {slide.index}; select by id"
        )
    return named[0]
