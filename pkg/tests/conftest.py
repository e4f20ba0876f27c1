# tests/conftest.py

import numpy as np
import pytest

from propagators.fixtures import random_pair, random_unit_vector


@pytest.fixture
def rng():
    return np.random.default_rng(1729)


@pytest.fixture
def pair(rng):
    A, B = random_pair(4, rng, 1.0)
    return A, B, random_unit_vector(4, rng)


@pytest.fixture
def output_dir(tmp_path):
    return tmp_path / "outputs"
