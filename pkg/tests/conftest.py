"""Shared test plumbing.

The acceptance suite reports one PASS/FAIL line per criterion; the
lines are collected here and replayed in the terminal summary so they
are visible in a plain ``pytest -v`` run, where per-test stdout is
captured.
"""
from __future__ import annotations

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
