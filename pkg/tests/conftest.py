import numpy as np
import pytest

from ik_bench.chain import load_chain_file

from helpers import data_path, make_planar_2r


@pytest.fixture(scope="session")
def kc1():
    return load_chain_file(data_path("kc1.json"))


@pytest.fixture(scope="session")
def kc2():
    return load_chain_file(data_path("kc2.json"))


@pytest.fixture(scope="session")
def planar2r():
    return make_planar_2r()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
