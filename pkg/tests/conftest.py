import numpy as np
import pytest

from linresp import CircleMap, FourierSeries, ResponseProblem, doubling_map, sine


@pytest.fixture(scope="session")
def doubling():
    return doubling_map()


@pytest.fixture(scope="session")
def wavy():
    # degree 2 with periodic part 0.1 sin(2 pi x): the nonlinear workhorse
    return CircleMap(2, sine(1, 0.1))


@pytest.fixture(scope="session")
def triple():
    return CircleMap(3, FourierSeries(np.zeros(1, dtype=complex)))


@pytest.fixture(scope="session")
def doubling_problem(doubling):
    return ResponseProblem.for_map(doubling, 64)


@pytest.fixture(scope="session")
def wavy_problem(wavy):
    return ResponseProblem.for_map(wavy, 64)


def random_series(rng, order, decay=0.5, zero_mean=False):
    """Random real-valued trigonometric polynomial with decaying modes."""
    c = rng.normal(size=2 * order + 1) + 1j * rng.normal(size=2 * order + 1)
    n = np.arange(-order, order + 1)
    c *= np.exp(-decay * np.abs(n))
    series = FourierSeries(c).hermitian_symmetrized()
    if zero_mean:
        c = np.array(series.coeffs)
        c[order] = 0.0
        series = FourierSeries(c)
    return series
