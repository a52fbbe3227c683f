import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def xs():
    return np.linspace(-10.0, 10.0, 2001)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
