import pytest

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail):
        ACCEPTANCE[number] = (name, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d} {name}: {detail}")
