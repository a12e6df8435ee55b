import math
import os

import numpy as np
import pytest
from hypothesis import settings

from stopdet import KernelSpec, assemble_matrix

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

LENGTHSCALES = (math.exp(-1), 1.0, math.e)


def kernel_matrix(n, dim=3, family="rbf", lengthscale=1.0, sigma2=1e-3, theta=1.0, seed=0):
    pts = np.random.default_rng(seed).standard_normal((n, dim))
    return assemble_matrix(pts, KernelSpec(family, theta, lengthscale), sigma2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report(capsys):
    """Record one PASS/FAIL line; all lines are repeated in the terminal summary."""

    def report(name, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
