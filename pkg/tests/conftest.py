import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from helpers import ACCEPTANCE_LINES, make_problem

from kirchfrac import DomainSpec, exponent_preset
from kirchfrac.problem import Indicator, SineSource

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def dom1():
    return DomainSpec.interval(0.0, 1.0, 16)


@pytest.fixture(scope="session")
def dom2():
    return DomainSpec.square(0.0, 1.0, 4)


@pytest.fixture(scope="session")
def const_fields():
    return exponent_preset("constant", p=2.0, s=0.4)


@pytest.fixture(scope="session")
def var_fields():
    return exponent_preset("sinusoidal", p=1.7, p_amplitude=0.15, s=0.4, s_amplitude=0.05)


@pytest.fixture(scope="session")
def convex_problem(dom1, const_fields):
    return make_problem(dom1, const_fields)


@pytest.fixture(scope="session")
def full_problem(dom1):
    fields = exponent_preset("sinusoidal", p=1.8, p_amplitude=0.1, s=0.4, s_amplitude=0.05)
    return make_problem(dom1, fields, "full", "periodic", Indicator((0.2,), (0.6,), 1.0),
                        SineSource(1.0, 3.0), kparams={"gamma": 0.9}, pparams={"alpha": 0.3})
