import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from postsel import make_instance

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SQ7 = math.sqrt(7.0)

# filled by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def example1(mu=0.5, p=0.5):
    rho = np.diag([mu / 2, mu / 2, 1 - mu])
    sigma = np.diag([mu / 4, 3 * mu / 4, 1 - mu])
    return make_instance(rho, sigma, p)


def qubit(p=0.5):
    rho = np.array([[0.5, 0.25], [0.25, 0.5]])
    sigma = np.diag([0.75, 0.25])
    return make_instance(rho, sigma, p)


def ket_projector(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


@pytest.fixture
def ex1():
    return example1()


@pytest.fixture
def q_half():
    return qubit(0.5)
