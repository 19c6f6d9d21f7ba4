"""Replay the acceptance verdict lines after the terminal summary.

Output capture hides prints from passing tests, so the one-line-per-criterion
report would otherwise only surface for failures (or under ``-s``).
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None) if module else None
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)
