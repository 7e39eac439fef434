import sys

_LINES = []


def report(number: int, name: str, ok: bool, detail: str) -> None:
    """Record and print one acceptance line."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name} -- {detail}"
    _LINES.append((number, line))
    sys.__stdout__.write("\n" + line + "\n")
    sys.__stdout__.flush()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
