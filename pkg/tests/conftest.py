import numpy as np
import pytest

from qigsim.numkernel import RandomStream


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def stream():
    return RandomStream(12345)


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def random_unit(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_density(rng, n, rank=None):
    rank = rank or n
    A = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho)
