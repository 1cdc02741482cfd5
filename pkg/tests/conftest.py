import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)``; printed again in the terminal summary."""
    name = request.node.name

    def record(ok: bool, detail: str):
        line = f"{name.removeprefix('test_'):<32} {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash.setdefault(_LINES, []).append(line)
        print(line)
        return ok

    return record


_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
