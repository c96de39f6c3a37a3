import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile("ci")


def random_operator(dim, rng, interior=False):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    if interior:
        a[-1, :] = 0.0
        a[:, -1] = 0.0
    return a


def random_psd(dim, rng, unit_trace=True):
    a = random_operator(dim, rng)
    rho = a @ a.conj().T
    if unit_trace:
        rho /= np.trace(rho).real
    return rho


def random_vector(dim, rng, interior=False, normalize=True):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if interior:
        v[-1] = 0.0
    if normalize:
        v /= np.linalg.norm(v)
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
