import numpy as np
import pytest

from adlasso import RngStream


@pytest.fixture
def rng():
    return RngStream(20260809)


def random_psd(rng: RngStream, p: int, rank=None) -> np.ndarray:
    r = rank or p
    B = rng.normal_matrix(p, r)
    return B @ B.T / r


def random_matrix(rng: RngStream, m: int, k: int) -> np.ndarray:
    return rng.normal_matrix(m, k)
