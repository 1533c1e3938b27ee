"""SINR, bit error rate and the analytic precoding FLOP models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METHODS = ("ZF", "rKA", "SwoR-rKA", "PCG")

# Reference precoding costs for the sparse XL-MIMO-AFDM case, in units of N^2.
# Kept for comparison only: the (N_ts, T_s, T_p, nnz) values behind them are unknown.
REFERENCE_FLOPS_N2 = {"ZF": 32768, "rKA": 12800, "SwoR-rKA": 16896, "PCG": 2816}


@dataclass(frozen=True)
class FlopsParams:
    N: int
    K: int
    N_ts: int
    T_s: int
    T_p: int
    nnz: int

    def __post_init__(self):
        for name in ("N", "K", "N_ts", "T_s", "T_p", "nnz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def flops_analytic(method: str, params: FlopsParams) -> int:
    """Complex-operation counts of the four precoders.

    ZF: ``N^2 * 2 K^2 * N_ts``; rKA: ``N_ts * T_s``;
    SwoR-rKA: ``N_ts * T_s + 2 N_ts K``; PCG: ``nnz + nnz * T_p``.
    """
    p = params
    if method == "ZF":
        return p.N ** 2 * 2 * p.K ** 2 * p.N_ts
    if method == "rKA":
        return p.N_ts * p.T_s
    if method == "SwoR-rKA":
        return p.N_ts * p.T_s + 2 * p.N_ts * p.K
    if method == "PCG":
        return p.nnz + p.nnz * p.T_p
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def sinr_user(k: int, channels, precoders, noise_power: float, literal: bool = False) -> float:
    """SINR of user ``k`` (1-based) under linear precoding.

    ``channels[j]`` is ``h_j`` and ``precoders[j]`` is ``f_j``; the gain of
    stream ``j`` at user ``k`` is ``h_k^H f_j``. The default denominator is the
    interference leaking onto user ``k``'s own channel plus noise. With
    ``literal=True`` the other users' own-stream powers ``|h_j^H f_j|^2`` are
    added to the denominator as well.
    """
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    h = np.asarray(channels, dtype=complex)
    f = np.asarray(precoders, dtype=complex)
    K = h.shape[0]
    if f.shape != h.shape:
        raise ValueError("need one precoder per channel vector of the same length")
    if not 1 <= k <= K:
        raise IndexError(f"user index {k} outside 1..{K}")
    i = k - 1
    gains = np.abs(f.conj() @ h[i]) ** 2  # |h_k^H f_j|^2 for every j
    others = np.arange(K) != i
    denom = gains[others].sum() + noise_power
    if literal:
        own = np.abs(np.einsum("ij,ij->i", h.conj(), f)) ** 2
        denom += own[others].sum()
    return float(gains[i] / denom)


def sinr_all(H: np.ndarray, F: np.ndarray, noise_power: float) -> np.ndarray:
    """Leakage SINR of every stream for a channel ``H`` (rows = receive streams)
    and precoder ``F`` (columns = data streams)."""
    G = np.abs(H @ F) ** 2
    sig = np.diag(G)
    return sig / (G.sum(axis=1) - sig + noise_power)


def ber(tx_bits, rx_bits) -> float:
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise ValueError(f"length mismatch: {tx.size} vs {rx.size}")
    if tx.size == 0:
        raise ValueError("empty bit sequences")
    return float(np.count_nonzero(tx != rx) / tx.size)


def bit_errors(tx_bits, rx_bits) -> int:
    return int(np.count_nonzero(np.asarray(tx_bits).ravel() != np.asarray(rx_bits).ravel()))
