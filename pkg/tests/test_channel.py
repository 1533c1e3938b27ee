import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_afdm.afdm import AfdmParams, build_daft_matrix, default_c1
from mimo_afdm.channel import (
    ChannelProfile,
    MimoChannelSpec,
    PathSpec,
    apply_channel,
    build_link_matrix,
    build_mimo_matrix,
    build_path_matrix,
    build_time_domain_mimo_matrix,
    build_time_domain_path_matrix,
    doppler_spreading_factor,
    index_indicator,
    phase_factor,
    random_mimo_channel,
    split_doppler,
)

from .conftest import afdm_params, crandn, random_path


def conjugated(M, params):
    A = build_daft_matrix(params)
    return A.conj().T @ M @ A


@pytest.mark.parametrize("nu,alpha,beta", [(0.0, 0, 0.0), (0.5, 0, 0.5), (-0.5, -1, 0.5), (0.7, 1, -0.3), (-2.3, -2, -0.3), (3.0, 3, 0.0)])
def test_split_doppler(nu, alpha, beta):
    a, b = split_doppler(nu)
    assert a == alpha and b == pytest.approx(beta, abs=1e-12)
    assert -0.5 < b <= 0.5


def test_rejects_bad_delay():
    with pytest.raises(ValueError):
        PathSpec(1.0, -1, 0.0)
    with pytest.raises(ValueError):
        PathSpec(1.0, 1.5, 0.0)


def test_profile_bounds():
    with pytest.raises(ValueError):
        ChannelProfile(())
    with pytest.raises(ValueError):
        ChannelProfile((PathSpec(1, 3, 0.0),), l_max=2, nu_max=1.0)
    prof = ChannelProfile((PathSpec(1, 1, 1.4), PathSpec(1, 0, -0.2)))
    assert prof.l_max == 1 and prof.nu_max == pytest.approx(1.4) and prof.alpha_max == 1


def test_index_indicator_examples():
    p16 = AfdmParams(16, 5 / 32)
    assert index_indicator(PathSpec(1, 0, 0.0), p16) == 0
    assert index_indicator(PathSpec(1, 1, 2.0), p16) == 7
    assert index_indicator(PathSpec(1, 0, -1.0), p16) == 15


def test_index_indicator_needs_integer_shift():
    with pytest.raises(ValueError):
        index_indicator(PathSpec(1, 1, 0.0), AfdmParams(16, 0.1))


def test_phase_factor_examples():
    p = AfdmParams(16, 0.3, 0.2)
    assert phase_factor(0, 5, 5, p) == pytest.approx(1.0, abs=1e-14)
    assert phase_factor(1, 0, 4, AfdmParams(16)) == pytest.approx(-1j, abs=1e-14)
    m = np.arange(16)
    vals = phase_factor(3, m[:, None], m[None, :], p)
    assert np.max(np.abs(np.abs(vals) - 1)) < 1e-14
    with pytest.raises(IndexError):
        phase_factor(0, 16, 0, p)


def test_spreading_factor_integer_doppler():
    p = AfdmParams(16, 5 / 32)
    # ind = 5 + 0 for l = 0, alpha = 5
    assert doppler_spreading_factor(0, 5.0, 3, 8, p) == pytest.approx(16)
    for mp in range(16):
        if mp != 8:
            assert abs(doppler_spreading_factor(0, 5.0, 3, mp, p)) < 1e-10


def test_spreading_factor_half_bin():
    p = AfdmParams(16)
    val = doppler_spreading_factor(0, 0.5, 4, 4, p)
    explicit = np.sum(np.exp(-2j * np.pi * 0.5 * np.arange(16) / 16))
    assert val == pytest.approx(explicit, abs=1e-12)
    assert abs(val) == pytest.approx(1 / np.sin(np.pi / 32), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(theta_frac=st.floats(-0.5, 0.5), m=st.integers(0, 15), mp=st.integers(0, 15), l=st.integers(0, 3))
def test_spreading_factor_matches_explicit_sum(theta_frac, m, mp, l):
    p = AfdmParams(16, 5 / 32)
    nu = 1.0 + theta_frac
    path = PathSpec(1, l, nu)
    theta = m + index_indicator(path, p) - mp + path.beta
    explicit = np.sum(np.exp(-2j * np.pi * theta * np.arange(16) / 16))
    assert doppler_spreading_factor(l, nu, m, mp, p) == pytest.approx(explicit, abs=1e-9)


def test_path_matrix_trivial_path_is_identity():
    p = afdm_params(16)
    assert np.allclose(build_path_matrix(PathSpec(1, 0, 0.0), p), np.eye(16), atol=1e-12)
    assert np.allclose(build_time_domain_path_matrix(PathSpec(1, 0, 0.0), p), np.eye(16))


def test_integer_doppler_single_tap_per_row():
    p = afdm_params(16)
    path = PathSpec(1, 2, -1.0)
    ind = index_indicator(path, p)
    H = build_path_matrix(path, p)
    for m in range(16):
        nz = np.flatnonzero(np.abs(H[m]) > 1e-10)
        assert list(nz) == [(m + ind) % 16]
        assert abs(H[m, nz[0]]) == pytest.approx(1.0, abs=1e-12)


def test_time_domain_operator_unitary(rng):
    for _ in range(20):
        N = int(rng.choice([8, 16, 32]))
        M = build_time_domain_path_matrix(random_path(rng, N), afdm_params(N))
        assert np.linalg.norm(M @ M.conj().T - np.eye(N)) < 1e-10


@pytest.mark.parametrize("N", [8, 16, 32, 64])
def test_closed_form_matches_time_domain_oracle(N, rng):
    p = afdm_params(N, alpha_max=2)
    for _ in range(10):
        path = random_path(rng, N, gain=1.0)
        H = build_path_matrix(path, p)
        ref = conjugated(build_time_domain_path_matrix(path, p), p)
        assert np.max(np.abs(H - ref)) < 1e-9
        assert np.linalg.norm(H) ** 2 == pytest.approx(N, abs=1e-9)
        assert np.linalg.norm(H @ H.conj().T - np.eye(N)) < 1e-9


def test_oracle_with_nonzero_c2(rng):
    p = AfdmParams(32, default_c1(1, 32), 0.3183)
    for _ in range(5):
        path = random_path(rng, 32, nu_max=1.4, gain=1.0)
        ref = conjugated(build_time_domain_path_matrix(path, p), p)
        assert np.max(np.abs(build_path_matrix(path, p) - ref)) < 1e-9


def test_ofdm_reduction_oracle(rng):
    p = AfdmParams.ofdm(16)
    path = random_path(rng, 16, gain=1.0)
    ref = conjugated(build_time_domain_path_matrix(path, p), p)
    assert np.max(np.abs(build_path_matrix(path, p) - ref)) < 1e-9


def test_link_matrix(rng):
    p = afdm_params(16)
    assert np.allclose(build_link_matrix([PathSpec(1, 0, 0.0)], p), np.eye(16), atol=1e-12)
    prof = ChannelProfile((random_path(rng, 16), random_path(rng, 16)))
    H = build_link_matrix(prof, p)
    assert np.allclose(build_link_matrix(prof.scaled(2.0), p), 2 * H, rtol=0, atol=1e-12)
    M = sum(q.gain * build_time_domain_path_matrix(q, p) for q in prof.paths)
    assert np.max(np.abs(H - conjugated(M, p))) < 1e-9
    with pytest.raises(ValueError):
        build_link_matrix([], p)


def test_integer_doppler_link_sparsity(rng):
    p = afdm_params(32, alpha_max=2)
    paths = [PathSpec(complex(crandn(rng)), l, float(a)) for l, a in [(0, 1), (1, -2), (3, 0)]]
    H = build_link_matrix(paths, p)
    inds = {index_indicator(q, p) for q in paths}
    for m in range(32):
        cols = set(np.flatnonzero(np.abs(H[m]) > 1e-10))
        assert len(cols) <= len(paths)
        assert cols <= {(m + i) % 32 for i in inds}


def test_mimo_layout(rng):
    p = afdm_params(8, alpha_max=1)
    spec = random_mimo_channel(rng, N_r=3, N_t=2, n_paths=3, l_max=2, nu_max=1.3)
    H = build_mimo_matrix(spec, p)
    assert H.shape == (24, 16)
    for r in range(3):
        for t in range(2):
            block = H[r * 8:(r + 1) * 8, t * 8:(t + 1) * 8]
            assert np.allclose(block, build_link_matrix(spec.link(r, t), p), atol=1e-14)
    # block (2, 1) in the 1-based numbering of the layout
    assert np.allclose(H[8:16, 0:8], build_link_matrix(spec.link(1, 0), p), atol=1e-14)
    A = np.kron(np.eye(2), build_daft_matrix(p))
    B = np.kron(np.eye(3), build_daft_matrix(p))
    assert np.max(np.abs(B.conj().T @ build_time_domain_mimo_matrix(spec, p) @ A - H)) < 1e-9


def test_single_link_mimo_equals_link(rng):
    p = afdm_params(16)
    spec = random_mimo_channel(rng, 1, 1, 2, 2, 1.5)
    assert np.allclose(build_mimo_matrix(spec, p), build_link_matrix(spec.link(0, 0), p), atol=1e-14)


def test_mimo_spec_validation():
    with pytest.raises(ValueError):
        MimoChannelSpec((0, 1), (0.0,), np.ones((1, 1, 2)))
    with pytest.raises(ValueError):
        MimoChannelSpec((0,), (0.0,), np.ones((1, 1, 2)))


def test_random_gain_power(rng):
    spec = random_mimo_channel(rng, 8, 8, 4, 2, 1.0)
    total = np.sum(np.abs(spec.gains) ** 2, axis=2)
    assert np.mean(total) == pytest.approx(1.0, abs=0.1)
    unit = random_mimo_channel(rng, 1, 1, 4, 2, 1.0, gain_model="unit")
    assert np.allclose(np.abs(unit.gains) ** 2, 0.25)


def test_apply_channel_noiseless(rng):
    H = crandn(rng, 6, 4)
    x = crandn(rng, 4)
    assert np.array_equal(apply_channel(H, x, 0.0, rng), H @ x)


def test_apply_channel_noise_power():
    rng = np.random.default_rng(7)
    sigma2 = 0.37
    # 100 blocks of 1000 so the identity stays small
    samples = np.concatenate([apply_channel(np.eye(1000), np.zeros(1000), sigma2, rng) for _ in range(100)])
    assert samples.size == 100_000
    assert np.mean(np.abs(samples) ** 2) == pytest.approx(sigma2, rel=0.03)
    # circular symmetry: equal power in both real dimensions
    assert np.var(samples.real) == pytest.approx(sigma2 / 2, rel=0.03)
    assert np.var(samples.imag) == pytest.approx(sigma2 / 2, rel=0.03)


def test_apply_channel_deterministic(rng):
    H = crandn(rng, 5, 5)
    x = crandn(rng, 5)
    a = apply_channel(H, x, 0.1, np.random.default_rng(3))
    b = apply_channel(H, x, 0.1, np.random.default_rng(3))
    assert a.tobytes() == b.tobytes()


def test_apply_channel_errors(rng):
    with pytest.raises(ValueError):
        apply_channel(np.eye(3), np.ones(3), -1.0, rng)
    with pytest.raises(ValueError):
        apply_channel(np.eye(3), np.ones(4), 0.0, rng)
