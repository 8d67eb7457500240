"""PASS/FAIL bookkeeping for the acceptance suite."""
from __future__ import annotations

from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(number: int, label: str):
    """Record one PASS or FAIL line for the block, re-raising any failure."""
    try:
        yield
    except BaseException as exc:
        LINES.append(f"FAIL criterion {number}: {label} ({type(exc).__name__})")
        print(LINES[-1])
        raise
    LINES.append(f"PASS criterion {number}: {label}")
    print(LINES[-1])
