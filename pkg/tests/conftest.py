import os

import pytest

from coxperc import cayley, coxeter

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# filled by test_acceptance; printed once at the end of the run
ACCEPTANCE_LINES = {}


def fixture_path(name):
    return os.path.join(FIXTURES, name)


@pytest.fixture(scope="session")
def dodeca():
    return coxeter.dodecahedron()


@pytest.fixture(scope="session")
def dodeca_ball_5(dodeca):
    return cayley.build_ball(dodeca, 5)


@pytest.fixture(scope="session")
def dodeca_ball_3(dodeca):
    return cayley.build_ball(dodeca, 3)


@pytest.fixture(scope="session")
def pentagon_ball_7():
    return cayley.build_ball(coxeter.pentagon(), 7)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
