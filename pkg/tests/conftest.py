import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20251021)


def ginibre(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def rand_state(rng, d):
    g = ginibre(rng, d)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


KET_PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
RHO_PLUS = np.outer(KET_PLUS, KET_PLUS)
