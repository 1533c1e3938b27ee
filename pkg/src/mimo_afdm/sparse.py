"""eSNR-driven sparsification of the DAFT-domain channel into compressed-row form."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

DEFAULT_THRESHOLD_DB = -12.0


class FlopCounter:
    """Real floating-point operation tally owned by one solver run."""

    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = int(count)

    def add(self, n: int) -> None:
        self.count += int(n)

    def __repr__(self):
        return f"FlopCounter({self.count})"


@dataclass(frozen=True, eq=False)
class SparseChannelMatrix:
    """Compressed-row complex matrix.

    Row ``i`` owns ``indices[indptr[i]:indptr[i+1]]`` (strictly increasing
    columns) and the matching ``values``.
    """

    shape: tuple[int, int]
    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rows, cols = self.shape
        if self.indptr.shape != (rows + 1,) or self.indptr[0] != 0:
            raise ValueError("indptr must have rows+1 entries starting at 0")
        if self.indices.shape != self.values.shape or self.indptr[-1] != self.values.size:
            raise ValueError("indptr, indices and values disagree on nnz")
        for a in (self.indptr, self.indices, self.values):
            a.flags.writeable = False
        # row id of every stored entry, used by the products
        object.__setattr__(self, "_row_of", np.repeat(np.arange(rows), np.diff(self.indptr)))

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_dense(cls, H: np.ndarray, mask: np.ndarray | None = None) -> "SparseChannelMatrix":
        H = np.asarray(H, dtype=complex)
        keep = H != 0 if mask is None else (mask & (H != 0))
        r, c = np.nonzero(keep)  # row-major, so columns ascend within a row
        indptr = np.zeros(H.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=H.shape[0]), out=indptr[1:])
        return cls(H.shape, indptr, c.astype(np.int64), H[r, c].copy())

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        out[self._row_of, self.indices] = self.values
        return out

    def row_entries(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.indices[s:e], self.values[s:e]

    def matvec(self, x: np.ndarray, counter: FlopCounter | None = None) -> np.ndarray:
        return spmv(self, x, counter)

    def rmatvec(self, x: np.ndarray, counter: FlopCounter | None = None) -> np.ndarray:
        return spmv_adjoint(self, x, counter)

    def to_csv(self) -> str:
        return coordinates_to_csv(self._row_of, self.indices, self.values)


def _accumulate(target_idx: np.ndarray, prod: np.ndarray, size: int) -> np.ndarray:
    re = np.bincount(target_idx, weights=prod.real, minlength=size)
    im = np.bincount(target_idx, weights=prod.imag, minlength=size)
    return re + 1j * im


def spmv(S: SparseChannelMatrix, x, counter: FlopCounter | None = None) -> np.ndarray:
    """``S @ x``; charges ``8 * nnz`` real FLOPs to ``counter``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (S.cols,):
        raise ValueError(f"expected vector of length {S.cols}, got shape {x.shape}")
    if counter is not None:
        counter.add(8 * S.nnz)
    return _accumulate(S._row_of, S.values * x[S.indices], S.rows)


def spmv_adjoint(S: SparseChannelMatrix, x, counter: FlopCounter | None = None) -> np.ndarray:
    """``S^H @ x``; same cost as :func:`spmv`."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (S.rows,):
        raise ValueError(f"expected vector of length {S.rows}, got shape {x.shape}")
    if counter is not None:
        counter.add(8 * S.nnz)
    return _accumulate(S.indices, S.values.conj() * x[S._row_of], S.cols)


def element_esnr(value, noise_power: float):
    """Per-element effective SNR ``10 log10(|value|^2 / N0)`` in dB (``-inf`` for zeros)."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    power = np.abs(np.asarray(value)) ** 2
    with np.errstate(divide="ignore"):
        out = 10 * np.log10(power / noise_power)
    return out if out.ndim else float(out)


def sparsify(H, threshold_db: float = DEFAULT_THRESHOLD_DB, noise_power: float = 1.0) -> SparseChannelMatrix:
    """Keep the entries whose eSNR reaches ``threshold_db``.

    Each row's largest-magnitude entry is kept regardless so that no nonzero
    row of ``H`` is emptied.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise ValueError("H must be a matrix")
    if not np.any(H):
        raise ValueError("cannot sparsify an all-zero channel")
    if threshold_db == -np.inf:
        keep = np.ones(H.shape, dtype=bool)
    else:
        keep = element_esnr(H, noise_power) >= threshold_db
    mag = np.abs(H)
    rows = np.arange(H.shape[0])
    keep[rows, np.argmax(mag, axis=1)] = True
    return SparseChannelMatrix.from_dense(H, keep)


def coordinates_to_csv(rows, cols, values) -> str:
    buf = io.StringIO(newline="")
    buf.write("row,col,re,im\n")
    for r, c, v in zip(rows, cols, values):
        buf.write(f"{int(r)},{int(c)},{v.real:.17g},{v.imag:.17g}\n")
    return buf.getvalue()


def dense_to_csv(H: np.ndarray) -> str:
    """Every entry of ``H`` (zeros included) as ``row,col,re,im`` lines, row-major."""
    H = np.asarray(H, dtype=complex)
    r, c = np.indices(H.shape)
    return coordinates_to_csv(r.ravel(), c.ravel(), H.ravel())


def read_coordinate_csv(text: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != "row,col,re,im":
        raise ValueError("missing row,col,re,im header")
    data = np.array([ln.split(",") for ln in lines[1:]], dtype=float).reshape(-1, 4)
    r, c = data[:, 0].astype(int), data[:, 1].astype(int)
    if shape is None:
        shape = (r.max() + 1, c.max() + 1) if r.size else (0, 0)
    out = np.zeros(shape, dtype=complex)
    out[r, c] = data[:, 2] + 1j * data[:, 3]
    return out
