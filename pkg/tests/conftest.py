import numpy as np
import pytest
from hypothesis import settings

from precess import observables as ob

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def four13():
    return ob.make_four_level(1.0, 3.0)


@pytest.fixture(scope="session")
def spin32():
    return ob.make_spin(1.5)


@pytest.fixture(scope="session")
def clock60():
    return ob.make_clock(60)


def builtin_pairs():
    return [ob.make_four_level(1, 3), ob.make_four_level(1, 2.72), ob.make_spin(0.5), ob.make_spin(1),
            ob.make_spin(1.5), ob.make_spin(2), ob.make_clock(6), ob.make_clock(12), ob.make_clock(60)]
