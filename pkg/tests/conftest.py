import numpy as np
import pytest

from jacobi_spectra import preset


@pytest.fixture(scope="session")
def hermite():
    return preset("hermite")


@pytest.fixture(scope="session")
def semicircle():
    # a_n = 1/2, b_n = 0: p_n are Chebyshev U_n, mu is the semicircle on [-1, 1]
    return preset("constant", {"a": 0.5, "b": 0})


@pytest.fixture(scope="session")
def discrete_seq():
    return preset("power_law", {"alpha": 1, "p": 1, "gamma": 4})


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
