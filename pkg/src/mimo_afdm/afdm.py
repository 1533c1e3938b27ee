"""Discrete affine Fourier transform, AFDM (de)modulation and Gray-coded QAM."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class AfdmParams:
    """Chirp-subcarrier count ``N`` and the two chirp rates of the DAFT.

    ``c1 = c2 = 0`` reduces the DAFT to the inverse DFT, i.e. plain OFDM.
    """

    N: int
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N <= 0:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")

    @classmethod
    def ofdm(cls, N: int) -> "AfdmParams":
        return cls(N, 0.0, 0.0)

    @classmethod
    def for_doppler(cls, N: int, alpha_max: int, c2: float = 0.0) -> "AfdmParams":
        return cls(N, default_c1(alpha_max, N), c2)


def default_c1(alpha_max: int, N: int) -> float:
    """Chirp rate ``(2*alpha_max + 1) / (2N)``, so that ``2*N*c1`` is an odd integer."""
    if alpha_max < 0:
        raise ValueError("alpha_max must be nonnegative")
    return (2 * alpha_max + 1) / (2 * N)


@lru_cache(maxsize=64)
def _daft_matrix(N: int, c1: float, c2: float) -> np.ndarray:
    n = np.arange(N)
    # reduce the quadratic phases modulo 1 before exponentiating to keep precision at large N
    chirp1 = np.mod(c1 * n.astype(float) ** 2, 1.0)
    chirp2 = np.mod(c2 * n.astype(float) ** 2, 1.0)
    dft = np.mod(np.outer(n, n), N) / N
    phase = chirp1[:, None] + dft + chirp2[None, :]
    A = np.exp(2j * np.pi * phase) / np.sqrt(N)
    A.flags.writeable = False
    return A


def build_daft_matrix(params: AfdmParams) -> np.ndarray:
    """Return the N x N modulation matrix ``A = L_c1^H F^H L_c2^H``.

    Entry ``(n, m)`` is ``exp(j 2 pi (c1 n^2 + n m / N + c2 m^2)) / sqrt(N)``.
    The returned array is read-only and shared between callers.
    """
    return _daft_matrix(int(params.N), float(params.c1), float(params.c2))


def _check_len(v: np.ndarray, N: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != N:
        raise ValueError(f"expected leading dimension {N}, got {v.shape[0]}")
    return v


def daft_modulate(x, params: AfdmParams) -> np.ndarray:
    """DAFT-domain symbols -> time-domain chirp multicarrier signal (``A @ x``).

    ``x`` may be a vector or an ``(N, ...)`` array, one frame per column.
    """
    x = _check_len(x, params.N)
    return build_daft_matrix(params) @ x


def daft_demodulate(s, params: AfdmParams) -> np.ndarray:
    s = _check_len(s, params.N)
    return build_daft_matrix(params).conj().T @ s


# ---------------------------------------------------------------------------
# QAM
# ---------------------------------------------------------------------------

SUPPORTED_ORDERS = (4, 16, 64)


def _gray(i: np.ndarray) -> np.ndarray:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class ModulationAlphabet:
    """Square Gray-coded QAM with unit average symbol energy.

    Symbol index ``k`` carries the bit label ``k`` written MSB first. The first
    half of the label selects the in-phase level and the second half the
    quadrature level, each Gray-coded along its axis with label 0 on the most
    positive amplitude. For 4-QAM this gives::

        00 -> (+1 + 1j)/sqrt(2)    01 -> (+1 - 1j)/sqrt(2)
        10 -> (-1 + 1j)/sqrt(2)    11 -> (-1 - 1j)/sqrt(2)
    """

    order: int
    constellation: np.ndarray = field(init=False, repr=False, compare=False)
    labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise ValueError(f"unsupported QAM order {self.order}; use one of {SUPPORTED_ORDERS}")
        k = self.bits_per_symbol
        half = k // 2
        side = 1 << half
        levels = (side - 1) - 2 * np.arange(side)  # descending amplitude
        # gray label g sits at amplitude position p where gray(p) == g
        pos_of_label = np.empty(side, dtype=int)
        pos_of_label[_gray(np.arange(side))] = np.arange(side)

        idx = np.arange(self.order)
        i_lab = idx >> half
        q_lab = idx & (side - 1)
        points = levels[pos_of_label[i_lab]] + 1j * levels[pos_of_label[q_lab]]
        points = points / np.sqrt(np.mean(np.abs(points) ** 2))
        bits = (idx[:, None] >> np.arange(k - 1, -1, -1)) & 1

        object.__setattr__(self, "constellation", points)
        object.__setattr__(self, "labels", bits.astype(np.uint8))

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))


def qam_modulate(bits, alphabet: ModulationAlphabet) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = alphabet.bits_per_symbol
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} not divisible by {k} bits per symbol")
    if bits.size == 0:
        return np.zeros(0, dtype=complex)
    weights = 1 << np.arange(k - 1, -1, -1)
    idx = bits.reshape(-1, k) @ weights
    return alphabet.constellation[idx]


def qam_demodulate(symbols, alphabet: ModulationAlphabet, chunk: int = 1 << 14) -> np.ndarray:
    """Hard minimum-distance decision; exact ties go to the lower symbol index."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    out = np.empty(symbols.size, dtype=np.int64)
    pts = alphabet.constellation
    for start in range(0, symbols.size, chunk):
        blk = symbols[start:start + chunk]
        d = np.abs(blk[:, None] - pts[None, :]) ** 2
        out[start:start + chunk] = np.argmin(d, axis=1)
    return alphabet.labels[out].ravel()
