import numpy as np
import pytest
from hypothesis import settings

from lempertkit.domain import make_bidisc, make_dab

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def bidisc():
    return make_bidisc()


@pytest.fixture
def dab():
    return make_dab(0.6, 0.6)
