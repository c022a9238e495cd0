import numpy as np
import pytest

from qrmlab import qrm


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_density(rng, d, faithful=True):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    if faithful:
        rho = rho + 0.1 * np.eye(d)
    return rho / np.trace(rho)


def random_qrm(rng, d, n_channels=2):
    channels = tuple(
        qrm.ResetChannel(random_density(rng, d), float(rng.uniform(0.2, 1.5)))
        for _ in range(n_channels)
    )
    return qrm.QrmSystem(random_hermitian(rng, d), channels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
