import numpy as np
import pytest

from aura.core import HoleMask, Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def gray_image(rng):
    return Image(rng.random((12, 16, 1)))


@pytest.fixture
def rgb_image(rng):
    return Image(rng.random((9, 7, 3)))


@pytest.fixture
def center_target():
    bits = np.zeros((12, 16), bool)
    bits[4:8, 6:10] = True
    return HoleMask(bits)
