from __future__ import annotations

import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a criterion's outcome; the lines are echoed in the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{name}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s[2:s.index(":")])):
            terminalreporter.write_line(line)
