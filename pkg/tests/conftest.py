import pytest

ACCEPTANCE_RESULTS = {}


def record(number, title, passed, detail=""):
    ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {title}: {detail}")
