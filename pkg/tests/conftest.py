from __future__ import annotations

from _support import ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title} -- {detail}")
