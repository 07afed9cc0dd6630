from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (title, passed, seconds); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, bool, float]] = {}


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, secs = ACCEPTANCE[num]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] {num}. {title} ({secs:.2f}s)"
        )
