import math

import numpy as np
import pytest

from momentcrit import fock


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tmsv_half():
    return fock.make_tmsv((40, 40), 0.5)


@pytest.fixture(scope="session")
def tmsv_one():
    return fock.make_tmsv((84, 84), 1.0)


@pytest.fixture(scope="session")
def sq_vac_half():
    return fock.make_sq_vac((40,), 0.5)


@pytest.fixture(scope="session")
def vacuum2():
    return fock.make_fock((8, 8), (0, 0))


@pytest.fixture(scope="session")
def coherent2():
    return fock.make_coherent((24, 24), (0.7 + 0.2j, -0.4 + 1.0j))


SINH2 = lambda r: math.sinh(r) ** 2  # noqa: E731
