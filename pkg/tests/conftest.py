"""Collects one pass/fail line per acceptance criterion for the session summary."""

CRITERIA: dict[int, tuple[bool, str]] = {}


def record(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
