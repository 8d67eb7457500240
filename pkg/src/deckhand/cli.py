"""Command-line interface: ``deckhand edit | parse | bench``.

Machine-readable JSON goes to standard output; logs go to standard error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import JUDGE_MODES, load_manifest, report_csv, report_json, run_suite
from .config import load_config
from .errors import (
    ConfigError,
    DeckIOError,
    DeckhandError,
    ManifestError,
    PackageError,
    UsageError,
)
from .package import load_deck
from .pipeline import direct_edit, edit_deck
from .provider import LLMClient
from .slidejson import deck_to_json, dumps

EXIT_SUCCESS, EXIT_PARTIAL, EXIT_FAILED, EXIT_REFUSED, EXIT_USAGE, EXIT_IO = range(6)
STATUS_EXIT = {"success": EXIT_SUCCESS, "partial": EXIT_PARTIAL, "failed": EXIT_FAILED,
               "refused": EXIT_REFUSED}

log = logging.getLogger("deckhand")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this surface reserves 2 for failed edits."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deckhand", description="Edit PowerPoint decks from natural-language instructions.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on standard error")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    edit = sub.add_parser("edit", help="apply an instruction to a deck")
    edit.add_argument("--file", required=True, help="input .pptx")
    edit.add_argument("--instruction", required=True)
    edit.add_argument("--out", help="output .pptx (default: <file>.edited.pptx)")
    edit.add_argument("--mode", choices=("pipeline", "direct"), default="pipeline")
    edit.add_argument("--config", help="config JSON (default: ./deckhand.json if present)")
    edit.add_argument("--max-attempts", type=_positive)
    edit.add_argument("--overwrite", action="store_true", help="allow --out to equal --file")
    edit.add_argument("--no-timing", action="store_true", help="omit timing fields from the report")

    parse = sub.add_parser("parse", help="print a deck as slide JSON")
    parse.add_argument("--file", required=True)
    parse.add_argument("--slide", type=int, help="1-based slide number (default: all slides)")

    bench = sub.add_parser("bench", help="run a benchmark manifest")
    bench.add_argument("--manifest", required=True)
    bench.add_argument("--config", help="config JSON (default: ./deckhand.json if present)")
    bench.add_argument("--workers", type=_positive, default=1)
    bench.add_argument("--judge", choices=JUDGE_MODES, default="off")
    bench.add_argument("--report", help="also write the JSON report to this path")
    bench.add_argument("--csv", help="write per-record rows as CSV to this path")
    bench.add_argument("--no-timing", action="store_true", help="omit timing fields from the report")
    return parser


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    sys.stdout.flush()


def cmd_edit(args: argparse.Namespace) -> int:
    if not Path(args.file).is_file():
        raise DeckIOError(f"--file {args.file}: no such file")
    client = LLMClient(load_config(args.config))
    if args.mode == "direct":
        outcome = direct_edit(args.instruction, args.file, client, out_path=args.out, overwrite=args.overwrite)
    else:
        outcome = edit_deck(args.instruction, args.file, client, out_path=args.out, overwrite=args.overwrite,
                            max_attempts=args.max_attempts)
    for note in outcome.diagnostics:
        log.warning(note)
    _emit(json.dumps(outcome.to_dict(timing=not args.no_timing), ensure_ascii=False, indent=2))
    log.info("status: %s", outcome.status)
    return STATUS_EXIT[outcome.status]


def cmd_parse(args: argparse.Namespace) -> int:
    deck = load_deck(args.file)
    slides = deck_to_json(deck)
    if args.slide is None:
        _emit(dumps(slides))
        return EXIT_SUCCESS
    if not 1 <= args.slide <= len(slides):
        raise UsageError(f"--slide {args.slide}: the deck has slides 1..{len(slides)}")
    _emit(dumps(slides[args.slide - 1]))
    return EXIT_SUCCESS


def cmd_bench(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.judge == "image" and not config.render_command:
        raise ConfigError("--judge image needs render_command in the config; use --judge text to run offline")
    cases = load_manifest(args.manifest)
    client = LLMClient(config)
    try:
        records = run_suite(cases, client, workers=args.workers, judge=args.judge,
                            render_command=config.render_command)
        text = report_json(records, timing=not args.no_timing, judge=args.judge != "off")
    except Exception as exc:  # the harness itself broke, not a case
        log.error("bench harness error: %s: %s", type(exc).__name__, exc)
        return EXIT_FAILED
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report_csv(records, timing=not args.no_timing), encoding="utf-8")
    _emit(text)
    return EXIT_SUCCESS


COMMANDS = {"edit": cmd_edit, "parse": cmd_parse, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, ManifestError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (DeckIOError, PackageError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except DeckhandError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
