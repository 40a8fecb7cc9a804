import pytest

from zseries import corpus
from zseries.series import PrecisionContext

# Filled by the acceptance module; printed once at the end of the run.
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(256)


@pytest.fixture(scope="session")
def z3():
    return corpus.get("z3_sum2").sequence


@pytest.fixture(scope="session")
def ln2():
    return corpus.get("ln2").sequence


@pytest.fixture(scope="session")
def rd2():
    return corpus.get("rd2").sequence


@pytest.fixture(scope="session")
def cos_shift():
    return corpus.get("cos_shift").sequence


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
