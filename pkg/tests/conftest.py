import numpy as np
import pytest


def random_law(rng, d, floor=0.0):
    """Dirichlet(1) draw conditioned on every entry being at least ``floor``."""
    while True:
        p = rng.dirichlet(np.ones(d))
        if p.min() >= floor:
            return p


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
