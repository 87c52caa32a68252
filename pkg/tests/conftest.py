import numpy as np
import pytest

from holopipe import api
from holopipe.console import console_restore


@pytest.fixture(autouse=True)
def clean_state():
    api.reset_registry()
    yield
    console_restore()
    api.reset_registry()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
