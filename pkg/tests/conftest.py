import numpy as np
import pytest

from hopfsoliton.geometry import params_from_ab
from hopfsoliton.soliton import solve_profile


@pytest.fixture
def params():
    return params_from_ab(-2.0, -1.0)


@pytest.fixture
def equal_params():
    return params_from_ab(-1.0, -1.0)


@pytest.fixture
def soliton(params):
    return solve_profile(params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
