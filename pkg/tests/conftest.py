import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def add(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
