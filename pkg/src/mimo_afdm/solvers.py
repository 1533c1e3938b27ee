"""Conjugate-gradient precoding and its ZF / randomized-Kaczmarz baselines.

All iterative solvers count real floating-point operations. Vector kernels on
length-``n`` complex vectors (dot product, axpy, scaling) are charged ``8 n``;
a sparse product is charged ``8 nnz`` and a dense ``m x n`` product ``8 m n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .sparse import FlopCounter, SparseChannelMatrix, spmv, spmv_adjoint

PRECONDITIONERS = ("none", "diagonal")


class NonPositiveCurvatureError(ArithmeticError):
    """``p^H A p <= 0`` during CG: the operator is not Hermitian positive definite."""


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 100
    tol: float = 1e-8
    xi: float = 0.0
    preconditioner: str = "none"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.xi < 0:
            raise ValueError("xi must be nonnegative")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValueError(f"preconditioner must be one of {PRECONDITIONERS}")


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    final_residual_norm: float
    flops: int
    converged: bool = True
    info: dict = field(default_factory=dict)


class LinearOperator:
    """Hermitian operator given by a matvec and its per-application FLOP cost."""

    def __init__(self, n: int, matvec: Callable, flops_per_apply: int, diagonal: np.ndarray | None = None):
        self.n = n
        self._matvec = matvec
        self.flops_per_apply = flops_per_apply
        self._diagonal = diagonal

    def apply(self, x: np.ndarray, counter: FlopCounter) -> np.ndarray:
        counter.add(self.flops_per_apply)
        return self._matvec(x)

    def diagonal(self) -> np.ndarray:
        if self._diagonal is None:
            raise ValueError("operator does not expose its diagonal")
        return self._diagonal


class NormalOperator(LinearOperator):
    """``S^H S + xi I`` applied as two sparse products, never formed."""

    def __init__(self, S: SparseChannelMatrix, xi: float = 0.0):
        self.S = S
        self.xi = xi
        diag = np.bincount(S.indices, weights=np.abs(S.values) ** 2, minlength=S.cols) + xi
        extra = 8 * S.cols if xi else 0
        super().__init__(S.cols, self._normal, 16 * S.nnz + extra, diag.astype(complex))

    def _normal(self, x):
        y = spmv_adjoint(self.S, spmv(self.S, x))
        return y + self.xi * x if self.xi else y


def as_operator(A) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be square, got shape {A.shape}")
    n = A.shape[0]
    return LinearOperator(n, A.__matmul__, 8 * n * n, np.diag(A).copy())


def pcg_solve(A, b, cfg: SolverConfig, x0=None, callback: Callable | None = None) -> SolveReport:
    """Preconditioned conjugate gradient for a Hermitian positive-definite ``A``.

    With ``cfg.preconditioner == "none"`` this is the plain CG recursion:
    ``r0 = b - A x0``, step ``r^H r / p^H A p``, two-term direction update.
    ``"diagonal"`` uses the Jacobi preconditioner ``diag(A)^-1``. Iteration
    stops once ``||r||_2 < cfg.tol`` or after ``cfg.max_iters`` updates.
    ``callback(x)`` is called after every update.
    """
    op = as_operator(A)
    n = op.n
    b = np.asarray(b, dtype=complex)
    if b.shape != (n,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({n},)")
    x = np.zeros(n, dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    if x.shape != (n,):
        raise ValueError(f"initial guess has shape {x.shape}, expected ({n},)")

    counter = FlopCounter()
    precondition = cfg.preconditioner == "diagonal"
    if precondition:
        d = op.diagonal()
        if np.any(np.abs(d.imag) > 1e-12 * np.abs(d.real)) or np.any(d.real <= 0):
            raise ValueError("diagonal preconditioner needs a strictly positive diagonal")
        inv_d = 1.0 / d.real

    r = b - op.apply(x, counter)
    counter.add(8 * n)
    rr = np.vdot(r, r).real
    counter.add(8 * n)
    if precondition:
        z = inv_d * r
        rz = np.vdot(r, z).real
        counter.add(16 * n)
    else:
        z, rz = r, rr
    p = z.copy()

    it = 0
    while np.sqrt(rr) >= cfg.tol and it < cfg.max_iters:
        Ap = op.apply(p, counter)
        curv = np.vdot(p, Ap).real
        counter.add(8 * n)
        if curv <= 0:
            raise NonPositiveCurvatureError(f"p^H A p = {curv:.3e} at iteration {it}")
        step = rz / curv
        x = x + step * p
        r = r - step * Ap
        counter.add(16 * n)
        rr = np.vdot(r, r).real
        counter.add(8 * n)
        if precondition:
            z = inv_d * r
            rz_new = np.vdot(r, z).real
            counter.add(16 * n)
        else:
            z, rz_new = r, rr
        p = z + (rz_new / rz) * p
        counter.add(8 * n)
        rz = rz_new
        it += 1
        if callback is not None:
            callback(x)

    res = float(np.sqrt(rr))
    return SolveReport(x, it, res, counter.count, converged=res < cfg.tol)


def cg_solve(A, b, cfg: SolverConfig, x0=None, callback: Callable | None = None) -> SolveReport:
    """Unpreconditioned CG; identical arithmetic to ``pcg_solve`` with no preconditioner."""
    if cfg.preconditioner != "none":
        cfg = SolverConfig(cfg.max_iters, cfg.tol, cfg.xi, "none")
    return pcg_solve(A, b, cfg, x0, callback)


def pcg_precode(S: SparseChannelMatrix, b, cfg: SolverConfig, x0=None) -> SolveReport:
    """Transmit vector from the regularized normal equations ``(S^H S + xi I) x = S^H b``.

    Cost is ``8 nnz`` for ``S^H b`` plus ``16 nnz`` per operator application
    (one for the initial residual, one per iteration), plus ``O(cols)`` vector
    work. ``report.converged`` is False when ``max_iters`` ran out first.
    """
    b = np.asarray(b, dtype=complex)
    if b.shape != (S.rows,):
        raise ValueError(f"data vector has shape {b.shape}, expected ({S.rows},)")
    if S.nnz == 0:
        raise ValueError("sparse channel has no entries")
    counter = FlopCounter()
    rhs = spmv_adjoint(S, b, counter)
    report = pcg_solve(NormalOperator(S, cfg.xi), rhs, cfg, x0)
    report.flops += counter.count
    report.info["nnz"] = S.nnz
    return report


def zf_flops(m: int, n: int) -> int:
    """Dense count for ``H^H (H H^H + xi I)^-1 b`` with ``H`` of shape ``m x n``.

    Gram matrix, Cholesky, two triangular solves and the final ``H^H`` product.
    """
    return 8 * m * m * n + (8 * m ** 3) // 3 + 16 * m * m + 8 * m * n


def zf_precode(H, b, xi: float = 0.0) -> np.ndarray:
    """Regularized zero-forcing ``H^H (H H^H + xi I)^-1 b`` via Cholesky."""
    H = np.asarray(H, dtype=complex)
    b = np.asarray(b, dtype=complex)
    m = H.shape[0]
    if b.shape[0] != m:
        raise ValueError(f"data vector has length {b.shape[0]}, expected {m}")
    gram = H @ H.conj().T
    if xi == 0 and np.linalg.matrix_rank(H) < m:
        raise np.linalg.LinAlgError("channel is rank deficient and xi = 0")
    gram[np.diag_indices(m)] += xi
    factor = scipy.linalg.cho_factor(gram, lower=True)
    return H.conj().T @ scipy.linalg.cho_solve(factor, b)


# ---------------------------------------------------------------------------
# randomized Kaczmarz
# ---------------------------------------------------------------------------

def _kaczmarz_setup(H, b):
    H = np.asarray(H, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if b.shape != (H.shape[0],):
        raise ValueError(f"data vector has shape {b.shape}, expected ({H.shape[0]},)")
    norms = np.einsum("ij,ij->i", H.conj(), H).real
    if np.any(norms == 0):
        raise ValueError(f"zero row {int(np.argmin(norms))} in Kaczmarz system")
    return H, b, norms


def _kaczmarz_sweep(H, b, norms, order, x, counter):
    n = H.shape[1]
    for i in order:
        row = H[i]
        x += ((b[i] - row @ x) / norms[i]) * row.conj()
    counter.add(16 * n * len(order))
    return x


def _finish(H, b, x, T, counter, info) -> SolveReport:
    res = float(np.linalg.norm(b - H @ x))
    counter.add(8 * H.size)
    return SolveReport(x, T, res, counter.count, converged=True, info=info)


def rka_solve(H, b, cfg: SolverConfig, rng: np.random.Generator, x0=None) -> SolveReport:
    """Randomized Kaczmarz: ``cfg.max_iters`` row projections, rows drawn with
    probability proportional to ``||row||^2``."""
    H, b, norms = _kaczmarz_setup(H, b)
    m, n = H.shape
    counter = FlopCounter(8 * m * n)  # row norms
    x = np.zeros(n, dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    order = rng.choice(m, size=cfg.max_iters, p=norms / norms.sum())
    x = _kaczmarz_sweep(H, b, norms, order, x, counter)
    return _finish(H, b, x, cfg.max_iters, counter, {"row_visits": np.bincount(order, minlength=m)})


def swor_rka_solve(H, b, cfg: SolverConfig, rng: np.random.Generator, x0=None) -> SolveReport:
    """Kaczmarz with sampling without replacement: each epoch visits every row
    once in a fresh random order. The last epoch is truncated if
    ``cfg.max_iters`` is not a multiple of the row count."""
    H, b, norms = _kaczmarz_setup(H, b)
    m, n = H.shape
    counter = FlopCounter(8 * m * n + 2 * m * n)  # row norms + permutation bookkeeping
    x = np.zeros(n, dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    visits = np.zeros(m, dtype=np.int64)
    epochs = []
    remaining = cfg.max_iters
    while remaining > 0:
        order = rng.permutation(m)[:remaining]
        x = _kaczmarz_sweep(H, b, norms, order, x, counter)
        np.add.at(visits, order, 1)
        epochs.append(np.bincount(order, minlength=m))
        remaining -= len(order)
    return _finish(H, b, x, cfg.max_iters, counter, {"row_visits": visits, "epoch_visits": epochs})


def kaczmarz_precode(H, b, xi: float, iters: int, rng: np.random.Generator, without_replacement: bool = False) -> SolveReport:
    """Regularized precoder via Kaczmarz on ``[H, sqrt(xi) I] z = b`` from ``z = 0``.

    The minimum-norm solution of the augmented system has ``x = H^H (H H^H + xi I)^-1 b``
    in its first ``n`` entries, the same target as :func:`zf_precode`.
    """
    H = np.asarray(H, dtype=complex)
    m, n = H.shape
    aug = np.hstack([H, np.sqrt(xi) * np.eye(m)]) if xi > 0 else H
    solver = swor_rka_solve if without_replacement else rka_solve
    rep = solver(aug, b, SolverConfig(max_iters=iters), rng)
    rep.solution = rep.solution[:n]
    return rep
