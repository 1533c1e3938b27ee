import numpy as np
import pytest

from mimo_afdm.afdm import AfdmParams
from mimo_afdm.channel import PathSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_path(rng, N, l_max=3, nu_max=2.4, gain=None):
    g = complex(crandn(rng)) if gain is None else gain
    return PathSpec(g, int(rng.integers(0, l_max + 1)), float(rng.uniform(-nu_max, nu_max)))


def random_hpd(rng, n, cond, spread="uniform"):
    """Hermitian positive-definite matrix with condition number ``cond``.

    Eigenvalues are i.i.d. uniform on [1, cond] with both ends pinned
    (``spread="uniform"``) or geometrically spaced (``"geometric"``).
    """
    Q, _ = np.linalg.qr(crandn(rng, n, n))
    if spread == "geometric":
        eig = np.geomspace(1.0, cond, n)
    else:
        eig = rng.uniform(1.0, cond, n)
        eig[0], eig[-1] = 1.0, cond
    A = (Q * eig) @ Q.conj().T
    return (A + A.conj().T) / 2


def afdm_params(N, alpha_max=2):
    return AfdmParams.for_doppler(N, alpha_max)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
