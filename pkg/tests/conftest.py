import numpy as np
import pytest

from maskdecomp.basis import Subspace, SubspaceKind


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_subspace(rng, side, m):
    q, _ = np.linalg.qr(rng.standard_normal((side * side, m)))
    return Subspace(q, side, SubspaceKind.CUSTOM)


@pytest.fixture
def make_random_subspace(rng):
    return lambda side, m: random_subspace(rng, side, m)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
