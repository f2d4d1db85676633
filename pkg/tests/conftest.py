import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def _record(criterion: str, passed: bool, detail: str = "") -> None:
        line = f"{'PASS' if passed else 'FAIL'}  {criterion}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
