"""Slide-deck editing agent operating on the PPTX object model.

Typical use::

    from deckhand import LLMClient, edit_deck, load_config
    outcome = edit_deck("Make the title bold", "talk.pptx", LLMClient(load_config()))
"""
from __future__ import annotations

from .bench import (
    BenchCase,
    JudgeScores,
    RunRecord,
    SuiteMetrics,
    aggregate,
    build_judge_prompts,
    hard_percentage,
    load_manifest,
    parse_judge_scores,
    pearson,
    run_case,
    run_suite,
)
from .config import Config, load_config
from .editor import parse_edited_slide, validate_edited_slide
from .errors import DeckhandError
from .executor import TaskResult, run_direct, run_with_reflection
from .model import Deck, Paragraph, Run, RunFormat, Shape, Slide, normalize_runs
from .package import deck_to_bytes, load_deck, read_deck, save_deck
from .pipeline import EditOutcome, direct_edit, edit_deck
from .planner import Plan, Task, parse_plan
from .provider import LLMClient, MockProvider, Usage, compute_cost, mock_client
from .script import EditScript, apply_script, parse_edit_script
from .slidejson import deck_to_json, slide_to_json

__version__ = "0.1.0"

__all__ = [
    "BenchCase", "Config", "Deck", "DeckhandError", "EditOutcome", "EditScript", "JudgeScores", "LLMClient",
    "MockProvider", "Paragraph", "Plan", "Run", "RunFormat", "RunRecord", "Shape", "Slide", "SuiteMetrics", "Task",
    "TaskResult", "Usage", "aggregate", "apply_script", "build_judge_prompts", "compute_cost", "deck_to_bytes",
    "deck_to_json", "direct_edit", "edit_deck", "hard_percentage", "load_config", "load_deck", "load_manifest",
    "mock_client", "normalize_runs", "parse_edit_script", "parse_edited_slide", "parse_judge_scores", "parse_plan",
    "pearson", "read_deck", "run_case", "run_direct", "run_suite", "run_with_reflection", "save_deck",
    "slide_to_json", "validate_edited_slide",
]
