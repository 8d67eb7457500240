from __future__ import annotations

from pathlib import Path

import pytest

import criteria
import decks
import golden


@pytest.fixture(scope="session")
def corpus(tmp_path_factory) -> dict[str, Path]:
    """The hand-built fixture decks, written once per session."""
    return decks.build_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.fixture
def deck_file(corpus, tmp_path):
    """Copy a corpus deck into the test's own directory."""
    def make(name: str) -> Path:
        dst = tmp_path / f"{name}.pptx"
        dst.write_bytes(corpus[name].read_bytes())
        return dst
    return make


@pytest.fixture
def golden_suite(tmp_path) -> Path:
    """Config path of a freshly built golden suite."""
    return golden.build_golden(tmp_path / "golden")


def pytest_terminal_summary(terminalreporter):
    if criteria.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(criteria.LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
