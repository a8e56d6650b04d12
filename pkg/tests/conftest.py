import math

import numpy as np
import pytest

from cylproc import geometry as geo
from cylproc.process import ProcessConfig
from cylproc.sampling import DeterministicBall

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def ref_cfg():
    """d=3, k=1, gamma=0.3, deterministic ball bases of radius 1/2."""
    return ProcessConfig(3, 1, 0.3, DeterministicBall(0.5, 2))


@pytest.fixture
def unit_ball3():
    return geo.Ball.centered(3, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def within(a, b, n_se, se):
    return abs(a - b) <= n_se * se + 1e-15 * max(1.0, abs(b))


KAPPA3 = 4.0 * math.pi / 3.0
