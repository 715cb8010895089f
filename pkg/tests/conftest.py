import pytest

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert."""
    def check(label, ok, detail):
        ACCEPTANCE_RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        print(ACCEPTANCE_RESULTS[-1])
        assert ok, f"{label}: {detail}"
    return check
