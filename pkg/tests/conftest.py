import numpy as np
import pytest

from cslab.crossing import CrossingScenario
from cslab.levy import boundary_monolog, boundary_monomial, stable_model
from cslab.rng import RngStream


@pytest.fixture(scope="session")
def half_stable():
    return stable_model(0.5)


@pytest.fixture(scope="session")
def monomial_quarter():
    return boundary_monomial(0.25)


@pytest.fixture(scope="session")
def sqrt_log_boundary():
    # f(t) = sqrt(t)/log(e+t): the recurrent reference
    return boundary_monolog(0.5, 1.0)


@pytest.fixture(scope="session")
def transient_scenario(half_stable, monomial_quarter):
    return CrossingScenario(
        model=half_stable, boundary=monomial_quarter, cutoff=1e-2, horizon=80.0
    )


@pytest.fixture(scope="session")
def recurrent_scenario(half_stable, sqrt_log_boundary):
    return CrossingScenario(
        model=half_stable, boundary=sqrt_log_boundary, cutoff=1e-2, horizon=80.0
    )


@pytest.fixture()
def rng():
    return RngStream(seed=1234).child("tests")


def assert_close(actual, expected, rel=1e-12, abs_tol=0.0):
    actual, expected = float(actual), float(expected)
    assert abs(actual - expected) <= abs_tol + rel * abs(expected), (
        f"{actual!r} != {expected!r} (rel {rel}, abs {abs_tol})"
    )
