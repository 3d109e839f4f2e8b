import sys

import pytest

from josephy.numerics import PrecisionContext


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(400)


@pytest.fixture(scope="session")
def ctx100():
    return PrecisionContext(100)


@pytest.fixture(scope="session")
def ctx50():
    return PrecisionContext(50)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
