import numpy as np
import pytest

from cvqnet.random_unitary import RngStream, sample_haar_unitary


def dft_matrix(M):
    a = np.arange(M)
    return np.exp(2j * np.pi * np.outer(a, a) / M) / np.sqrt(M)


def haar_nets(M, n, seed=7):
    return [sample_haar_unitary(M, RngStream(seed, i)) for i in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
