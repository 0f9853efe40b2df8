from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from weakener_sim.minimax import minimax_round_value

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def minimax_value(backend: str):
    return minimax_round_value(3, backend)


@pytest.fixture(scope="session")
def minimax():
    return minimax_value


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
