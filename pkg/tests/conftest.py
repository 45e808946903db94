import numpy as np
import pytest

from atomqke import CHADOQ2, triangle_register


@pytest.fixture
def device():
    return CHADOQ2


@pytest.fixture
def register():
    """The standard 3-atom triangle at 4 um base spacing."""
    return triangle_register()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
