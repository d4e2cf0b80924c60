from __future__ import annotations

import pytest
from hypothesis import settings

from stalm.bench import layout
from stalm.bench.problems import bundled_problem
from stalm.motion import Env

from helpers import tiny_problem

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def p1():
    return bundled_problem("p1_analog")


@pytest.fixture(scope="session")
def p4():
    return bundled_problem("p4_analog")


@pytest.fixture(scope="session")
def p1_env(p1):
    return Env.build(p1)


@pytest.fixture(scope="session")
def p4_env(p4):
    return Env.build(p4)


@pytest.fixture(scope="session")
def lone():
    """One can alone on table1, goal to move it to table2."""
    return tiny_problem([layout.movable("can", layout.CAN, [1.2, 5.0, 0.0])], [["can", "on", "table2"]])


@pytest.fixture(scope="session")
def lone_env(lone):
    return Env.build(lone)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
