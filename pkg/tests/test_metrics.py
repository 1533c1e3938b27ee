import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_afdm.metrics import REFERENCE_FLOPS_N2, FlopsParams, ber, flops_analytic, sinr_all, sinr_user

from .conftest import crandn


def test_sinr_single_user():
    e1 = np.eye(4)[:1]
    assert sinr_user(1, e1, e1, 0.1) == pytest.approx(10.0)


def test_sinr_orthogonal_precoders(rng):
    K, n = 3, 6
    h = crandn(rng, K, n)
    f = crandn(rng, K, n)
    # make every f_j (j != 1) orthogonal to h_1
    for j in (1, 2):
        f[j] -= (h[0].conj() @ f[j]) / (h[0].conj() @ h[0]) * h[0]
    expected = abs(h[0].conj() @ f[0]) ** 2 / 0.5
    assert sinr_user(1, h, f, 0.5) == pytest.approx(expected, rel=1e-12)


def test_sinr_vanishes_with_noise(rng):
    h = crandn(rng, 2, 3)
    assert sinr_user(2, h, h, 1e12) < 1e-10


def test_sinr_errors(rng):
    h = crandn(rng, 2, 3)
    with pytest.raises(ValueError):
        sinr_user(1, h, h, 0.0)
    with pytest.raises(IndexError):
        sinr_user(3, h, h, 1.0)


def test_sinr_literal_variant_is_smaller(rng):
    h = crandn(rng, 4, 6)
    f = crandn(rng, 4, 6)
    assert sinr_user(2, h, f, 0.1, literal=True) < sinr_user(2, h, f, 0.1)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), phi=st.floats(-np.pi, np.pi))
def test_sinr_common_phase_invariance(seed, phi):
    rng = np.random.default_rng(seed)
    h = crandn(rng, 3, 5)
    f = crandn(rng, 3, 5)
    for k in (1, 2, 3):
        a = sinr_user(k, h, f, 0.3)
        b = sinr_user(k, h, np.exp(1j * phi) * f, 0.3)
        assert b == pytest.approx(a, rel=1e-10)


def test_sinr_all_agrees_with_per_user(rng):
    h = crandn(rng, 4, 7)
    f = crandn(rng, 4, 7)
    vec = sinr_all(h.conj(), f.T, 0.2)
    assert np.allclose(vec, [sinr_user(k, h, f, 0.2) for k in range(1, 5)])


def test_ber_examples():
    a = np.zeros(1000, dtype=int)
    assert ber(a, a) == 0.0
    assert ber(a, 1 - a) == 1.0
    b = a.copy()
    b[17] = 1
    assert ber(a, b) == 0.001
    with pytest.raises(ValueError):
        ber([0, 1], [0])
    with pytest.raises(ValueError):
        ber([], [])


@settings(max_examples=30)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200))
def test_ber_symmetric_and_bounded(pairs):
    x, y = zip(*pairs)
    assert ber(x, y) == ber(y, x)
    assert 0.0 <= ber(x, y) <= 1.0


def test_flops_examples():
    p = FlopsParams(N=16, K=16, N_ts=256, T_s=100, T_p=9, nnz=100)
    assert flops_analytic("PCG", p) == 1000
    assert flops_analytic("SwoR-rKA", p) - flops_analytic("rKA", p) == 8192
    assert flops_analytic("ZF", p) == 16 ** 2 * 2 * 16 ** 2 * 256
    assert flops_analytic("rKA", p) == 25600
    with pytest.raises(ValueError):
        flops_analytic("MMSE", p)
    with pytest.raises(ValueError):
        FlopsParams(N=0, K=1, N_ts=1, T_s=1, T_p=1, nnz=1)


def test_zf_reference_constant_matches_64_antenna_setup():
    # 2 K^2 N_ts = 32768 with K = 16 users and N_ts = N_t = 64 antennas
    p = FlopsParams(N=64, K=16, N_ts=64, T_s=1, T_p=1, nnz=1)
    assert flops_analytic("ZF", p) == REFERENCE_FLOPS_N2["ZF"] * 64 ** 2


@pytest.mark.parametrize("nnz,T_p", [(10, 1), (100, 9), (4096, 30)])
def test_pcg_flops_strictly_increasing(nnz, T_p):
    base = FlopsParams(N=8, K=2, N_ts=8, T_s=8, T_p=T_p, nnz=nnz)
    more_nnz = FlopsParams(N=8, K=2, N_ts=8, T_s=8, T_p=T_p, nnz=nnz + 1)
    more_it = FlopsParams(N=8, K=2, N_ts=8, T_s=8, T_p=T_p + 1, nnz=nnz)
    assert flops_analytic("PCG", more_nnz) > flops_analytic("PCG", base)
    assert flops_analytic("PCG", more_it) > flops_analytic("PCG", base)


def test_ordering_over_grid():
    N = 64
    for K, N_ts, T_s in itertools.product(range(2, 17), (16, 64, 256), (50, 200, 1000)):
        if N_ts < K:
            continue
        for T_p in (5, 10, 30):
            nnz = (N_ts * T_s - 1) // (1 + T_p)
            if nnz < 1:
                continue
            p = FlopsParams(N=N, K=K, N_ts=N_ts, T_s=T_s, T_p=T_p, nnz=nnz)
            f = {m: flops_analytic(m, p) for m in ("ZF", "rKA", "SwoR-rKA", "PCG")}
            assert f["PCG"] < f["rKA"] < f["SwoR-rKA"] < f["ZF"]
