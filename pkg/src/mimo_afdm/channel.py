"""Doubly-selective channel in the DAFT domain.

Each path is a (gain, integer delay, normalized Doppler) triple. The closed-form
DAFT-domain path matrix is cross-checked against ``A^H M A`` where ``M`` is the
time-domain operator of the same path under a chirp-periodic prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .afdm import AfdmParams, build_daft_matrix

SINGULARITY_TOL = 1e-12


def split_doppler(nu: float) -> tuple[int, float]:
    """Split ``nu`` into integer part ``alpha`` and fractional part ``beta`` in (-1/2, 1/2]."""
    alpha = math.ceil(nu - 0.5)
    return alpha, nu - alpha


@dataclass(frozen=True)
class PathSpec:
    gain: complex = 1.0
    delay: int = 0
    doppler: float = 0.0

    def __post_init__(self):
        if int(self.delay) != self.delay or self.delay < 0:
            raise ValueError(f"delay must be a nonnegative integer, got {self.delay!r}")

    @property
    def alpha(self) -> int:
        return split_doppler(self.doppler)[0]

    @property
    def beta(self) -> float:
        return split_doppler(self.doppler)[1]


@dataclass(frozen=True)
class ChannelProfile:
    paths: tuple[PathSpec, ...]
    l_max: int | None = None
    nu_max: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ValueError("a channel profile needs at least one path")
        if self.l_max is None:
            object.__setattr__(self, "l_max", max(p.delay for p in self.paths))
        if self.nu_max is None:
            object.__setattr__(self, "nu_max", max(abs(p.doppler) for p in self.paths))
        for p in self.paths:
            if p.delay > self.l_max or abs(p.doppler) > self.nu_max + 1e-12:
                raise ValueError(f"path {p} outside the (l_max={self.l_max}, nu_max={self.nu_max}) support")

    @property
    def alpha_max(self) -> int:
        return int(math.floor(self.nu_max + 0.5))

    def scaled(self, factor: complex) -> "ChannelProfile":
        paths = [PathSpec(p.gain * factor, p.delay, p.doppler) for p in self.paths]
        return ChannelProfile(tuple(paths), self.l_max, self.nu_max)


@dataclass(frozen=True)
class MimoChannelSpec:
    """Delay/Doppler support shared by every link, with per-link complex gains.

    ``gains`` has shape ``(N_r, N_t, P)``.
    """

    delays: tuple[int, ...]
    dopplers: tuple[float, ...]
    gains: np.ndarray = field(compare=False)
    l_max: int | None = None
    nu_max: float | None = None

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        object.__setattr__(self, "delays", tuple(int(d) for d in self.delays))
        object.__setattr__(self, "dopplers", tuple(float(v) for v in self.dopplers))
        object.__setattr__(self, "gains", gains)
        P = len(self.delays)
        if len(self.dopplers) != P or gains.ndim != 3 or gains.shape[2] != P:
            raise ValueError("link grid inconsistent with the shared path support")
        if gains.shape[0] < 1 or gains.shape[1] < 1 or P < 1:
            raise ValueError("need at least one antenna on each side and one path")

    @property
    def N_r(self) -> int:
        return self.gains.shape[0]

    @property
    def N_t(self) -> int:
        return self.gains.shape[1]

    def link(self, r: int, t: int) -> ChannelProfile:
        paths = tuple(PathSpec(g, l, v) for g, l, v in zip(self.gains[r, t], self.delays, self.dopplers))
        return ChannelProfile(paths, self.l_max, self.nu_max)


def random_mimo_channel(
    rng: np.random.Generator,
    N_r: int,
    N_t: int,
    n_paths: int,
    l_max: int,
    nu_max: float,
    fractional: bool = True,
    gain_model: str = "rayleigh",
) -> MimoChannelSpec:
    """Draw a shared delay-Doppler support and i.i.d. CN(0, 1/P) link gains.

    Dopplers follow the Jakes model ``nu_max * cos(theta)``; with
    ``fractional=False`` they are rounded to integers. ``gain_model="unit"``
    gives every path gain ``1/sqrt(P)`` (no fading).
    """
    delays = rng.integers(0, l_max + 1, size=n_paths)
    dopplers = nu_max * np.cos(rng.uniform(-np.pi, np.pi, size=n_paths))
    if not fractional:
        dopplers = np.clip(np.round(dopplers), -math.floor(nu_max), math.floor(nu_max))
    if gain_model == "rayleigh":
        shape = (N_r, N_t, n_paths)
        g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5 / n_paths)
    elif gain_model == "unit":
        g = np.full((N_r, N_t, n_paths), 1 / np.sqrt(n_paths), dtype=complex)
    else:
        raise ValueError(f"unknown gain model {gain_model!r}")
    return MimoChannelSpec(tuple(delays), tuple(dopplers), g, l_max, nu_max)


# ---------------------------------------------------------------------------
# closed-form DAFT-domain kernels
# ---------------------------------------------------------------------------

def _two_n_c1_l(l: int, params: AfdmParams) -> int:
    val = 2 * params.N * params.c1 * l
    k = round(val)
    if abs(val - k) > 1e-9:
        raise ValueError(f"2*N*c1*l = {val} is not an integer; pick c1 with default_c1")
    return int(k)


def index_indicator(path: PathSpec, params: AfdmParams) -> int:
    """Cyclic DAFT-domain shift ``(alpha + 2 N c1 l) mod N`` of a path."""
    return (path.alpha + _two_n_c1_l(path.delay, params)) % params.N


def phase_factor(l: int, m, m_prime, params: AfdmParams):
    """``exp(j 2pi/N (N c1 l^2 - m' l + N c2 (m'^2 - m^2)))``.

    Works elementwise on array indices.
    """
    N = params.N
    m = np.asarray(m)
    m_prime = np.asarray(m_prime)
    if np.any((m < 0) | (m >= N)) or np.any((m_prime < 0) | (m_prime >= N)):
        raise IndexError("DAFT index out of range")
    mf = m.astype(float)
    mpf = m_prime.astype(float)
    # fold every term into [0, 1) cycles before exponentiating
    cycles = (
        np.mod(params.c1 * l * l, 1.0)
        - np.mod(m_prime * l, N) / N
        + np.mod(params.c2 * (mpf ** 2 - mf ** 2), 1.0)
    )
    out = np.exp(2j * np.pi * cycles)
    return out if out.ndim else complex(out)


def _dirichlet(theta: np.ndarray, N: int) -> np.ndarray:
    # (e^{-j2pi t} - 1) / (e^{-j2pi t/N} - 1) rewritten with sines: no cancellation near integer t
    half_den = np.sin(np.pi * theta / N)
    singular = 2 * np.abs(half_den) < SINGULARITY_TOL
    ratio = np.sin(np.pi * theta) / np.where(singular, 1.0, half_den)
    value = np.exp(-1j * np.pi * theta * (N - 1) / N) * ratio
    return np.where(singular, N + 0j, value)


def doppler_spreading_factor(l: int, nu: float, m, m_prime, params: AfdmParams):
    """Geometric sum ``sum_n exp(-j 2pi theta n / N)`` with ``theta = m + ind - m' + beta``.

    Equals ``N`` at ``theta == 0 (mod N)``.
    """
    path = PathSpec(1.0, l, nu)
    ind = index_indicator(path, params)
    theta = np.asarray(m) + ind - np.asarray(m_prime) + path.beta
    # the sum is N-periodic in theta; folding keeps the exponentials accurate
    theta = np.mod(theta + params.N / 2, params.N) - params.N / 2
    out = _dirichlet(theta, params.N)
    return out if out.ndim else complex(out)


def build_path_matrix(path: PathSpec, params: AfdmParams) -> np.ndarray:
    """Unit-gain DAFT-domain matrix of one path; the path gain is not applied."""
    N = params.N
    m = np.arange(N)[:, None]
    mp = np.arange(N)[None, :]
    return phase_factor(path.delay, m, mp, params) * doppler_spreading_factor(
        path.delay, path.doppler, m, mp, params
    ) / N


def build_time_domain_path_matrix(path: PathSpec, params: AfdmParams) -> np.ndarray:
    """Unit-gain time-domain operator of one path under a chirp-periodic prefix.

    Row ``n`` picks sample ``(n - l) mod N``, multiplies by the Doppler phase
    ``exp(-j 2pi nu n / N)`` and, for wrapped samples ``n < l``, by the prefix
    phase ``exp(-j 2pi c1 (N^2 - 2N(l - n)))``.
    """
    N, l, c1 = params.N, path.delay, params.c1
    n = np.arange(N)
    vals = np.exp(-2j * np.pi * np.mod(path.doppler * n / N, 1.0))
    wrapped = n < l
    prefix = np.mod(c1 * (N * N - 2 * N * (l - n[wrapped])), 1.0)
    vals[wrapped] *= np.exp(-2j * np.pi * prefix)
    M = np.zeros((N, N), dtype=complex)
    M[n, (n - l) % N] = vals
    return M


def build_link_matrix(profile: ChannelProfile | Sequence[PathSpec], params: AfdmParams) -> np.ndarray:
    paths = profile.paths if isinstance(profile, ChannelProfile) else tuple(profile)
    if not paths:
        raise ValueError("empty path list")
    H = np.zeros((params.N, params.N), dtype=complex)
    for p in paths:
        H += p.gain * build_path_matrix(p, params)
    return H


def _assemble(spec: MimoChannelSpec, params: AfdmParams, per_path) -> np.ndarray:
    N = params.N
    bases = [per_path(PathSpec(1.0, l, v), params) for l, v in zip(spec.delays, spec.dopplers)]
    stack = np.stack(bases)  # (P, N, N)
    blocks = np.einsum("rtp,pij->rtij", spec.gains, stack)
    return blocks.transpose(0, 2, 1, 3).reshape(spec.N_r * N, spec.N_t * N)


def build_mimo_matrix(spec: MimoChannelSpec, params: AfdmParams) -> np.ndarray:
    """Effective (N N_r) x (N N_t) MIMO channel; block (r, t) is link (r, t)."""
    return _assemble(spec, params, build_path_matrix)


def build_time_domain_mimo_matrix(spec: MimoChannelSpec, params: AfdmParams) -> np.ndarray:
    return _assemble(spec, params, build_time_domain_path_matrix)


def apply_channel(H: np.ndarray, x: np.ndarray, noise_power: float, rng: np.random.Generator) -> np.ndarray:
    """``H @ x + w`` with ``w`` circularly-symmetric Gaussian of per-entry variance ``noise_power``."""
    if noise_power < 0:
        raise ValueError("noise power must be nonnegative")
    H = np.asarray(H)
    x = np.asarray(x)
    if H.shape[1] != x.shape[0]:
        raise ValueError(f"channel has {H.shape[1]} columns but x has {x.shape[0]} entries")
    y = H @ x
    if noise_power == 0:
        return y
    w = rng.standard_normal(y.shape + (2,)) @ np.array([1.0, 1j])
    return y + np.sqrt(noise_power / 2) * w
