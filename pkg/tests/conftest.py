"""Shared fixtures: small shifted model instances used across test modules."""

import numpy as np
import pytest

from tnvqe.hamiltonians import gen_heisenberg, gen_ising, gen_xyz, shift_negative


@pytest.fixture(scope="session")
def ising8():
    return shift_negative(gen_ising(8, 11))


@pytest.fixture(scope="session")
def xyz8():
    return shift_negative(gen_xyz(8, 12))


@pytest.fixture(scope="session")
def heis8():
    return shift_negative(gen_heisenberg(8, 13))


@pytest.fixture(scope="session")
def heis4():
    return shift_negative(gen_heisenberg(4, 5))


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)
