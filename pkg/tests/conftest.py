"""Shared test plumbing.

Echoes the acceptance verdict lines (one per criterion) in the terminal
summary, so a full run always ends with the pass/fail roster even when
stdout capture is on.
"""

import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "VERDICTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.VERDICTS:
        terminalreporter.write_line(line)
