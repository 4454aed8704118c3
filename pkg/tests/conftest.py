import pytest

from permreach import fixtures
from permreach.model import parse_aban, parse_local_state

# acceptance outcomes collected by test_acceptance, printed at the end of the run
ACCEPTANCE: dict = {}


@pytest.fixture
def chain():
    return parse_aban(fixtures.CHAIN)


@pytest.fixture
def mutex():
    return parse_aban(fixtures.MUTEX)


@pytest.fixture
def mutex_reset():
    return parse_aban(fixtures.MUTEX_RESET)


@pytest.fixture
def ordered():
    return parse_aban(fixtures.ORDERED)


@pytest.fixture
def ls():
    return parse_local_state


def pytest_runtest_makereport(item, call):
    crit = item.get_closest_marker("acceptance")
    if crit is None or call.when != "call":
        return
    key = crit.args[0]
    ok = call.excinfo is None
    ACCEPTANCE[key] = ACCEPTANCE.get(key, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ACCEPTANCE[key] else 'FAIL'}")
