"""Benchmark harness: manifests, per-case runs, suite metrics and judging.

A manifest is JSON lines, one case per line::

    {"instruction_key": "3-1", "instruction": "...", "category": "TextEditing",
     "pptx_file": "slide_3-1.pptx",
     "hard": {"hard_type": "impossible", "ideal_description": "..."}}

``pptx_file`` is resolved against the manifest's directory. ``hard`` is
present only for Hard cases.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
import shlex
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from .errors import (
    DegenerateInput,
    EmptySuite,
    JudgeParseError,
    ManifestError,
    OutOfRange,
    ProviderError,
    RenderUnavailable,
)
from .llmjson import loads_lenient
from .package import load_deck
from .pipeline import EditOutcome, direct_edit, edit_deck
from .provider import EFFICIENCY_STAGES, LLMClient, format_usd
from .slidejson import deck_to_json, dumps

log = logging.getLogger(__name__)

CATEGORIES = ("TextEditing", "VisualFormatting", "LayoutAdjustment", "SlideStructure")
HARD_TYPES = ("visual_dependent", "ambiguous", "multi_step", "impossible")
JUDGE_MODES = ("image", "text", "off")
ADHERENCE_KEYS = ("instruction_adherence", "visualquality")
TILC_KEYS = ("text_quality", "image_quality", "layout_quality", "color_quality")
SCORE_KEYS = ADHERENCE_KEYS + TILC_KEYS
_KEY_RE = re.compile(r"\d+(-\d+)?")


# -- manifest ---------------------------------------------------------------


@dataclass(frozen=True)
class HardInfo:
    hard_type: str
    ideal_description: str


@dataclass(frozen=True)
class BenchCase:
    instruction_key: str
    instruction: str
    category: str
    pptx_file: Path
    hard: Optional[HardInfo] = None

    @property
    def feasible(self) -> bool:
        return self.hard is None or self.hard.hard_type != "impossible"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"instruction_key": self.instruction_key, "instruction": self.instruction,
                               "category": self.category, "pptx_file": self.pptx_file.name}
        if self.hard is not None:
            out["hard"] = {"hard_type": self.hard.hard_type,
                           "ideal_description": self.hard.ideal_description}
        return out


def _case_from(obj: Any, line: int, base: Path) -> BenchCase:
    if not isinstance(obj, dict):
        raise ManifestError(line, "expected a JSON object")
    for key in ("instruction_key", "instruction", "category", "pptx_file"):
        if not isinstance(obj.get(key), str) or not obj[key].strip():
            raise ManifestError(line, f"{key!r} must be a non-empty string")
    key = obj["instruction_key"]
    if not _KEY_RE.fullmatch(key):
        raise ManifestError(line, f"instruction_key {key!r} is not of the form n or n-m")
    if obj["category"] not in CATEGORIES:
        raise ManifestError(line, f"unknown category {obj['category']!r} (expected one of {CATEGORIES})")
    hard = None
    if obj.get("hard") is not None:
        h = obj["hard"]
        if not isinstance(h, dict):
            raise ManifestError(line, "'hard' must be an object")
        if h.get("hard_type") not in HARD_TYPES:
            raise ManifestError(line, f"unknown hard_type {h.get('hard_type')!r} (expected one of {HARD_TYPES})")
        if not isinstance(h.get("ideal_description", ""), str):
            raise ManifestError(line, "'ideal_description' must be a string")
        hard = HardInfo(h["hard_type"], h.get("ideal_description", ""))
    path = Path(obj["pptx_file"])
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise ManifestError(line, f"deck not found: {path}")
    if path.name != f"slide_{key}.pptx":
        log.warning("manifest line %d: %s does not follow slide_<instruction_key>.pptx", line, path.name)
    return BenchCase(key, obj["instruction"], obj["category"], path, hard)


def load_manifest(path: Union[str, Path]) -> list[BenchCase]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(0, f"cannot read {path}: {exc}") from None
    cases, seen = [], set()
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(n, f"not JSON: {exc}") from None
        case = _case_from(obj, n, path.parent)
        if case.instruction_key in seen:
            raise ManifestError(n, f"duplicate instruction_key {case.instruction_key!r}")
        seen.add(case.instruction_key)
        cases.append(case)
    if not cases:
        raise ManifestError(0, f"{path} holds no cases")
    return cases


# -- judging ----------------------------------------------------------------

_JUDGE_HEAD = """You are an expert slide-editing judge.
    TASK
    - Compare the ORIGINAL slide with the EDITED slide.
"""

_ADHERENCE_PROMPT = _JUDGE_HEAD + """    - Decide how well the EDITED slide follows the INSTRUCTION and how aesthetically pleasing it is.
    SCORING
    Return valid JSON with exactly these keys:
    {instruction_adherence: <int 0-5>,
    visualquality:       <int 0-5>
    }
    GUIDELINES
    Score each from 0 to 5, based on the following rubric:
    5 = Perfect: Fully satisfies the instruction / visually excellent with no flaws.
    4 = Mostly correct: Clearly reflects the instruction / visually strong but with minor flaws.
    3 = Partially correct: Instruction was followed to a noticeable degree, but key aspects are missing or flawed / visual layout or formatting needs improvement.
    2 = Slightly changed but inadequate: Some edits related to the instruction are present but insufficient or poorly done / visual design is lacking.
    1 = Attempted but incorrect: Some change is visible, but it does not match the instruction / visual result is clearly poor.
    0 = Completely fails: No meaningful attempt to follow the instruction / visually broken or irrelevant.
    Judge only what you can see in the given image(s) and notes.
    Return *only* the JSON object, nothing else."""

_TILC_PROMPT = _JUDGE_HEAD + """    - Evaluate how well the EDITED slide handles Text, Image, Layout, and Color aspects based on the INSTRUCTION.
    SCORING
    Return valid JSON with exactly these keys:
    {  text_quality: <int 0-5>,
      image_quality: <int 0-5>,
      layout_quality: <int 0-5>,
      color_quality: <int 0-5>
    }
    GUIDELINES
    Score each from 0 to 5, based on the following rubric:
    TEXT QUALITY:
    5 = Perfect: Text content, formatting, and typography are flawless and fully satisfy the instruction.
    4 = Mostly correct: Text elements are clearly improved but have minor issues in content, formatting, or typography.
    3 = Partially correct: Text improvements are noticeable but have significant issues in content, formatting, or typography.
    2 = Slightly changed but inadequate: Some text edits are present but insufficient or poorly implemented.
    1 = Attempted but incorrect: Text changes are visible but do not match the instruction or improve the slide.
    0 = Completely fails: No meaningful text improvements or changes are severely detrimental.
    IMAGE QUALITY:
    5 = Perfect: Images are optimal in selection, placement, sizing, and enhancement, fully satisfying the instruction.
    4 = Mostly correct: Images are well-selected and implemented with only minor issues in placement, sizing, or visual quality.
    3 = Partially correct: Image improvements are noticeable but have significant issues in selection, placement, sizing, or quality.
    2 = Slightly changed but inadequate: Some image edits are present but insufficient or poorly implemented.
    1 = Attempted but incorrect: Image changes are visible but do not match the instruction or improve the slide.
    0 = Completely fails: No meaningful image improvements or changes are severely detrimental.
    LAYOUT QUALITY:
    5 = Perfect: Slide organization, spacing, alignment, and element relationships are flawless and fully satisfy the instruction.
    4 = Mostly correct: Layout is clearly improved but has minor issues in organization, spacing, or alignment.
    3 = Partially correct: Layout improvements are noticeable but have significant issues in organization, spacing, or alignment.
    2 = Slightly changed but inadequate: Some layout edits are present but insufficient or poorly implemented.
    1 = Attempted but incorrect: Layout changes are visible but do not match the instruction or improve the slide.
    0 = Completely fails: No meaningful layout improvements or changes are severely detrimental.
    COLOR QUALITY:
    5 = Perfect: Color scheme, contrast, balance, and emphasis are flawless and fully satisfy the instruction.
    4 = Mostly correct: Color choices are clearly improved but have minor issues in scheme, contrast, or emphasis.
    3 = Partially correct: Color improvements are noticeable but have significant issues in scheme, contrast, or emphasis.
    2 = Slightly changed but inadequate: Some color edits are present but insufficient or poorly implemented.
    1 = Attempted but incorrect: Color changes are visible but do not match the instruction or improve the slide.
    0 = Completely fails: No meaningful color improvements or changes are severely detrimental.
    Judge only what you can see in the given image(s) and notes.
    Return *only* the JSON object, nothing else."""

TEXT_MODE_NOTICE = ("[text-fallback mode: the slides are given as JSON instead of images; "
                    "scores are not comparable to image-mode scores]")


def _judge_context(original: Sequence, edited: Sequence, instruction: str, mode: str,
                   notes: tuple[str, str]) -> str:
    lines = ["", f"INSTRUCTION: {instruction}"]
    if mode == "image":
        lines.append(f"The first {len(original)} image(s) show the ORIGINAL slides; "
                     f"the next {len(edited)} show the EDITED slides.")
    else:
        lines += [TEXT_MODE_NOTICE, "ORIGINAL slides (JSON):", dumps(list(original)),
                  "EDITED slides (JSON):", dumps(list(edited))]
    lines += [f"ORIGINAL notes: {notes[0]}", f"EDITED notes: {notes[1]}"]
    return "\n".join(lines)


def build_judge_prompts(original: Optional[Sequence], edited: Optional[Sequence], instruction: str,
                        mode: str = "image", notes: tuple[str, str] = ("", "")) -> tuple[str, str]:
    """The adherence/visual prompt and the text/image/layout/color prompt.

    In image mode ``original`` and ``edited`` are rendered PNG pages, sent
    alongside the text by the caller; ``None`` means nothing could be
    rendered. In text mode they are SlideJson lists embedded in the text.
    """
    if mode not in ("image", "text"):
        raise ValueError(f"judge mode must be 'image' or 'text', got {mode!r}")
    if mode == "image" and (original is None or edited is None):
        raise RenderUnavailable("image judging needs rendered slides; configure render_command "
                                "or use text mode")
    context = _judge_context(original or [], edited or [], instruction, mode, notes)
    return _ADHERENCE_PROMPT + context, _TILC_PROMPT + context


def build_hard_prompt(instruction: str, ideal_description: str) -> str:
    """Score a Hard-subset result against the case's ideal outcome."""
    return "\n".join([
        "You are an expert slide-editing judge.",
        "Compare the ORIGINAL slide with the EDITED slide and rate, from 0 to 5, how far the",
        "EDITED slide matches the IDEAL OUTCOME below (5 = fully matches, 0 = not at all).",
        f"INSTRUCTION: {instruction}",
        f"IDEAL OUTCOME: {ideal_description}",
        'Return only a JSON object of the form {"score": <int 0-5>}.',
    ])


@dataclass
class JudgeScores:
    instruction_adherence: int
    visualquality: int
    text_quality: int
    image_quality: int
    layout_quality: int
    color_quality: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in SCORE_KEYS}

    @classmethod
    def from_dict(cls, obj: dict) -> "JudgeScores":
        return cls(**{k: _score(obj, k) for k in SCORE_KEYS})


def _score(obj: dict, key: str) -> int:
    if key not in obj:
        raise JudgeParseError(f"judge reply lacks {key!r}")
    value = obj[key]
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise JudgeParseError(f"{key} must be an integer, got {value!r}")
    if not 0 <= value <= 5:
        raise OutOfRange(f"{key} = {value} is outside 0..5")
    return value


def _judge_obj(text: str) -> dict:
    try:
        obj = loads_lenient(text)
    except json.JSONDecodeError as exc:
        raise JudgeParseError(f"judge reply is not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise JudgeParseError("judge reply must be a JSON object")
    return obj


def parse_judge_scores(adherence_json: str, tilc_json: str) -> JudgeScores:
    merged = {**_judge_obj(adherence_json), **_judge_obj(tilc_json)}
    return JudgeScores.from_dict(merged)


def parse_hard_score(text: str) -> int:
    return _score(_judge_obj(text), "score")


def hard_percentage(score: int) -> Decimal:
    if isinstance(score, bool) or not isinstance(score, int) or not 0 <= score <= 5:
        raise OutOfRange(f"hard score {score!r} is outside 0..5")
    return Decimal(score) * 100 / 5


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xs, ys = [float(x) for x in xs], [float(y) for y in ys]
    if len(xs) != len(ys):
        raise DegenerateInput(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise DegenerateInput("need at least two points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise DegenerateInput("a constant vector has no correlation")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def render_slides(command: Union[str, Sequence[str]], pptx: Path, out_dir: Path) -> list[bytes]:
    """Run the configured renderer and collect the PNG pages it writes.

    ``{input}`` and ``{outdir}`` in the command are replaced by the deck
    path and an empty output directory.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    args = shlex.split(command) if isinstance(command, str) else list(command)
    args = [a.replace("{input}", str(pptx)).replace("{outdir}", str(out_dir)) for a in args]
    try:
        subprocess.run(args, check=True, capture_output=True, timeout=300)
    except (OSError, subprocess.SubprocessError) as exc:
        raise RenderUnavailable(f"render command failed: {exc}") from None
    pages = sorted(out_dir.glob("*.png"))
    if not pages:
        raise RenderUnavailable("render command produced no PNG files")
    return [p.read_bytes() for p in pages]


# -- running ----------------------------------------------------------------


@dataclass
class RunRecord:
    case: BenchCase
    sr: bool
    refused: bool
    cf: bool
    wall_time_seconds: Decimal
    input_tokens: int
    output_tokens: int
    cost_usd: Decimal
    status: str = "failed"
    judge: Optional[JudgeScores] = None
    hard_score: Optional[int] = None
    cf_reasons: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self, timing: bool = True, judge: bool = True) -> dict:
        out = {**self.case.to_dict(), "status": self.status, "sr": self.sr, "refused": self.refused,
               "cf": self.cf, "cf_reasons": list(self.cf_reasons),
               "input_tokens": self.input_tokens, "output_tokens": self.output_tokens,
               "cost_usd": _num(self.cost_usd), "diagnostics": list(self.diagnostics)}
        if timing:
            out["wall_time_seconds"] = _num(self.wall_time_seconds)
        if judge:
            out["judge"] = self.judge.to_dict() if self.judge is not None else None
            out["hard_score"] = self.hard_score
        return out


def _num(d: Decimal) -> float:
    return float(d)


def _cf_reasons(outcome: EditOutcome, max_attempts: int) -> list[str]:
    reasons = []
    for r in outcome.task_results:
        outcomes = r.trace.outcomes
        if len(outcomes) >= max_attempts and all(o not in ("success", "refused") for o in outcomes):
            reasons.append(f"page {r.task.page_number}: {len(outcomes)} consecutive invalid attempts")
    if outcome.output_path is not None:
        try:
            load_deck(outcome.output_path)
        except Exception as exc:
            reasons.append(f"output deck does not re-load: {type(exc).__name__}: {exc}")
    return reasons


def _judge_case(case: BenchCase, original: Path, edited: Path, client: LLMClient, mode: str,
                render_command, work: Path) -> tuple[JudgeScores, Optional[int]]:
    before_deck, after_deck = load_deck(original), load_deck(edited)
    notes = ("\n".join(s.notes_text for s in before_deck.slides),
             "\n".join(s.notes_text for s in after_deck.slides))
    images: tuple[bytes, ...] = ()
    if mode == "image":
        if not render_command:
            raise RenderUnavailable("no render_command configured")
        before = render_slides(render_command, original, work / "render_before")
        after = render_slides(render_command, edited, work / "render_after")
        images = tuple(before) + tuple(after)
    else:
        before, after = deck_to_json(before_deck), deck_to_json(after_deck)
    p1, p2 = build_judge_prompts(before, after, case.instruction, mode, notes)
    r1 = client.complete("judge", p1, images=images).text
    r2 = client.complete("judge", p2, images=images).text
    scores = parse_judge_scores(r1, r2)
    hard_score = None
    if case.hard is not None:
        prompt = build_hard_prompt(case.instruction, case.hard.ideal_description)
        if mode == "text":
            prompt += "\n" + _judge_context(before, after, case.instruction, mode, notes)
        hard_score = parse_hard_score(client.complete("judge", prompt, images=images).text)
    return scores, hard_score


def run_case(case: BenchCase, client: LLMClient, *, mode: str = "pipeline", judge: str = "off",
             render_command=None, output_dir: Optional[Path] = None) -> RunRecord:
    """Run one case on a private copy of its deck; every failure lands in the record."""
    client = client.with_ledger()
    cf_reasons: list[str] = []
    diagnostics: list[str] = []
    outcome: Optional[EditOutcome] = None
    scores, hard_score = None, None
    with tempfile.TemporaryDirectory(prefix="deckhand-") as tmp:
        work = Path(tmp)
        deck_copy = work / case.pptx_file.name
        shutil.copyfile(case.pptx_file, deck_copy)
        out = work / (deck_copy.stem + ".edited.pptx")
        try:
            if mode == "direct":
                outcome = direct_edit(case.instruction, deck_copy, client, out_path=out)
            else:
                outcome = edit_deck(case.instruction, deck_copy, client, out_path=out)
        except Exception as exc:  # an unhandled pipeline exception is a catastrophic failure
            cf_reasons.append(f"unhandled exception: {type(exc).__name__}: {exc}")
        if outcome is not None:
            diagnostics += outcome.diagnostics
            cf_reasons += _cf_reasons(outcome, client.config.max_attempts if mode != "direct" else 1)
            if judge != "off" and not cf_reasons:
                edited = Path(outcome.output_path) if outcome.output_path else deck_copy
                try:
                    # judge calls land in the case's own ledger under the judge stage
                    scores, hard_score = _judge_case(case, deck_copy, edited, client.with_ledger(outcome.ledger),
                                                     judge, render_command, work)
                except (JudgeParseError, OutOfRange, RenderUnavailable, ProviderError) as exc:
                    diagnostics.append(f"judge: {type(exc).__name__}: {exc}")
            if output_dir is not None and outcome.output_path:
                output_dir.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(outcome.output_path, output_dir / Path(outcome.output_path).name)
    status = outcome.status if outcome is not None else "failed"
    ledger = outcome.ledger if outcome is not None else client.ledger
    usage = ledger.usage(EFFICIENCY_STAGES)
    cf = bool(cf_reasons)
    return RunRecord(
        case=case,
        sr=status == "success" and not cf,
        refused=status == "refused",
        cf=cf,
        wall_time_seconds=outcome.wall_time_seconds if outcome is not None else Decimal(0),
        input_tokens=usage.input_tokens,
        output_tokens=usage.output_tokens,
        cost_usd=ledger.cost(EFFICIENCY_STAGES),
        status=status,
        judge=scores,
        hard_score=hard_score,
        cf_reasons=cf_reasons,
        diagnostics=diagnostics,
    )


def run_suite(cases: Sequence[BenchCase], client: LLMClient, *, workers: int = 1, mode: str = "pipeline",
              judge: str = "off", render_command=None, output_dir: Optional[Path] = None) -> list[RunRecord]:
    """Run every case, ``workers`` at a time; records come back in manifest order."""
    if workers < 1:
        raise ValueError("workers must be at least 1")

    def one(case: BenchCase) -> RunRecord:
        log.info("case %s: start", case.instruction_key)
        record = run_case(case, client, mode=mode, judge=judge, render_command=render_command,
                          output_dir=output_dir)
        log.info("case %s: %s%s", case.instruction_key, record.status, " (cf)" if record.cf else "")
        return record

    if workers == 1:
        return [one(c) for c in cases]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, cases))


# -- metrics ----------------------------------------------------------------


def _percent(num: int, den: int) -> Optional[float]:
    return round(100.0 * num / den, 6) if den else None


def _mean(values: Iterable[Any]) -> Optional[float]:
    vals = [Decimal(v) if not isinstance(v, Decimal) else v for v in values]
    if not vals:
        return None
    return float(sum(vals, Decimal(0)) / len(vals))


@dataclass
class GroupMetrics:
    cases: int
    feasible_cases: int
    sr_percent: Optional[float]
    mean_wall_time_seconds: Optional[float]
    mean_input_tokens_k: Optional[float]
    mean_output_tokens_k: Optional[float]
    mean_cost_usd: Optional[float]

    def to_dict(self, timing: bool = True) -> dict:
        out = {"cases": self.cases, "feasible_cases": self.feasible_cases, "sr_percent": self.sr_percent,
               "mean_input_tokens_k": self.mean_input_tokens_k,
               "mean_output_tokens_k": self.mean_output_tokens_k, "mean_cost_usd": self.mean_cost_usd}
        if timing:
            out["mean_wall_time_seconds"] = self.mean_wall_time_seconds
        return out


def _group(records: Sequence[RunRecord]) -> GroupMetrics:
    feasible = [r for r in records if r.case.feasible]
    return GroupMetrics(
        cases=len(records),
        feasible_cases=len(feasible),
        sr_percent=_percent(sum(r.sr for r in feasible), len(feasible)),
        mean_wall_time_seconds=_mean(r.wall_time_seconds for r in records),
        mean_input_tokens_k=_mean(Decimal(r.input_tokens) / 1000 for r in records),
        mean_output_tokens_k=_mean(Decimal(r.output_tokens) / 1000 for r in records),
        mean_cost_usd=_mean(r.cost_usd for r in records),
    )


@dataclass
class SuiteMetrics:
    overall: GroupMetrics
    by_category: dict[str, GroupMetrics]
    hard_sr_percent: dict[str, Optional[float]]
    ra_percent: Optional[float]
    cf_percent: Optional[float]
    hard_cases: int
    impossible_cases: int
    hard_score_percent: Optional[float] = None
    judge_means: Optional[dict[str, float]] = None

    def to_dict(self, timing: bool = True, judge: bool = True) -> dict:
        out = {
            "overall": self.overall.to_dict(timing),
            "by_category": {k: v.to_dict(timing) for k, v in self.by_category.items()},
            "hard": {
                "cases": self.hard_cases,
                "impossible_cases": self.impossible_cases,
                "sr_percent_by_type": dict(self.hard_sr_percent),
                "ra_percent": self.ra_percent,
                "cf_percent": self.cf_percent,
            },
        }
        if judge:
            out["hard"]["score_percent"] = self.hard_score_percent
            out["judge_means"] = self.judge_means
        return out


def aggregate(records: Sequence[RunRecord]) -> SuiteMetrics:
    if not records:
        raise EmptySuite("no records to aggregate")
    by_category = {c: _group([r for r in records if r.case.category == c])
                   for c in CATEGORIES if any(r.case.category == c for r in records)}
    hard = [r for r in records if r.case.hard is not None]
    impossible = [r for r in hard if r.case.hard.hard_type == "impossible"]
    hard_sr = {}
    for t in HARD_TYPES:
        group = [r for r in hard if r.case.hard.hard_type == t]
        if group and t != "impossible":
            hard_sr[t] = _percent(sum(r.sr for r in group), len(group))
    scored = [r.hard_score for r in hard if r.hard_score is not None]
    judged = [r.judge for r in records if r.judge is not None]
    judge_means = None
    if judged:
        judge_means = {k: _mean(getattr(j, k) for j in judged) for k in SCORE_KEYS}
    return SuiteMetrics(
        overall=_group(records),
        by_category=by_category,
        hard_sr_percent=hard_sr,
        ra_percent=_percent(sum(r.refused for r in impossible), len(impossible)),
        cf_percent=_percent(sum(r.cf for r in hard), len(hard)),
        hard_cases=len(hard),
        impossible_cases=len(impossible),
        hard_score_percent=_mean(hard_percentage(s) for s in scored) if scored else None,
        judge_means=judge_means,
    )


def build_report(records: Sequence[RunRecord], *, timing: bool = True, judge: bool = True) -> dict:
    return {
        "suite": aggregate(records).to_dict(timing, judge),
        "records": [r.to_dict(timing, judge) for r in records],
    }


def report_json(records: Sequence[RunRecord], *, timing: bool = True, judge: bool = True) -> str:
    return json.dumps(build_report(records, timing=timing, judge=judge), ensure_ascii=False, indent=2)


CSV_FIELDS = ("instruction_key", "category", "hard_type", "status", "sr", "refused", "cf",
              "input_tokens", "output_tokens", "cost_usd", "wall_time_seconds", *SCORE_KEYS, "hard_score")


def report_csv(records: Sequence[RunRecord], *, timing: bool = True) -> str:
    buf = io.StringIO()
    fields = [f for f in CSV_FIELDS if timing or f != "wall_time_seconds"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in records:
        row = {"instruction_key": r.case.instruction_key, "category": r.case.category,
               "hard_type": r.case.hard.hard_type if r.case.hard else "", "status": r.status,
               "sr": int(r.sr), "refused": int(r.refused), "cf": int(r.cf),
               "input_tokens": r.input_tokens, "output_tokens": r.output_tokens,
               "cost_usd": format_usd(r.cost_usd), "hard_score": "" if r.hard_score is None else r.hard_score}
        if timing:
            row["wall_time_seconds"] = str(r.wall_time_seconds)
        for k in SCORE_KEYS:
            row[k] = getattr(r.judge, k) if r.judge is not None else ""
        writer.writerow(row)
    return buf.getvalue()
