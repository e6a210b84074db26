import pytest

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str, seconds: float, budget: float):
        in_time = seconds <= budget
        ok = passed and in_time
        line = (f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}  "
                f"[{seconds:.1f}s, budget {budget:g}s]")
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
