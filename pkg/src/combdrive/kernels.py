"""Preconditioned conjugate-gradient kernels.

Two interchangeable backends solve the same SPD systems:

* ``numba``: the whole PCG loop, CSR matvec, and symmetric Gauss-Seidel
  sweeps compiled with ``@njit`` (default when numba imports cleanly);
* ``numpy``: scipy CSR matvec plus ``spsolve_triangular`` sweeps.

Selection: the ``COMBDRIVE_BACKEND`` environment variable (``auto`` |
``numba`` | ``numpy``), or an explicit ``backend=`` argument, e.g. from the
backend benchmark.  Within one backend the iteration is bitwise
deterministic run-to-run.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve_triangular

BACKEND_ENV = "COMBDRIVE_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via COMBDRIVE_BACKEND=numpy
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap


def resolve_backend(backend: str | None = None) -> str:
    choice = (backend or os.environ.get(BACKEND_ENV, "auto")).lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("COMBDRIVE_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    raise ValueError(f"unknown backend {choice!r}")


@njit(cache=True)
def _csr_matvec(indptr, indices, data, x, out):
    n = indptr.size - 1
    for i in range(n):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * x[indices[p]]
        out[i] = s


@njit(cache=True)
def _sgs_apply(indptr, indices, data, diag, r, y, z):
    """z = M^{-1} r with M = (D+L) D^{-1} (D+U); CSR indices must be sorted."""
    n = indptr.size - 1
    for i in range(n):
        s = r[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j >= i:
                break
            s -= data[p] * y[j]
        y[i] = s / diag[i]
    for i in range(n - 1, -1, -1):
        s = diag[i] * y[i]
        for p in range(indptr[i + 1] - 1, indptr[i] - 1, -1):
            j = indices[p]
            if j <= i:
                break
            s -= data[p] * z[j]
        z[i] = s / diag[i]


@njit(cache=True)
def _pcg_numba(indptr, indices, data, diag, b, x, tol, max_iter, use_sgs):
    n = b.size
    bnorm = np.sqrt(np.dot(b, b))
    if bnorm == 0.0:
        for i in range(n):
            x[i] = 0.0
        return 0, 0.0
    r = np.empty(n)
    _csr_matvec(indptr, indices, data, x, r)
    for i in range(n):
        r[i] = b[i] - r[i]
    z = np.empty(n)
    y = np.empty(n)
    if use_sgs:
        _sgs_apply(indptr, indices, data, diag, r, y, z)
    else:
        for i in range(n):
            z[i] = r[i] / diag[i]
    p = z.copy()
    rz = np.dot(r, z)
    Ap = np.empty(n)
    res = np.sqrt(np.dot(r, r)) / bnorm
    it = 0
    while res > tol and it < max_iter:
        _csr_matvec(indptr, indices, data, p, Ap)
        alpha = rz / np.dot(p, Ap)
        for i in range(n):
            x[i] += alpha * p[i]
            r[i] -= alpha * Ap[i]
        res = np.sqrt(np.dot(r, r)) / bnorm
        if not np.isfinite(res):
            return -it, res
        if use_sgs:
            _sgs_apply(indptr, indices, data, diag, r, y, z)
        else:
            for i in range(n):
                z[i] = r[i] / diag[i]
        rz_new = np.dot(r, z)
        beta = rz_new / rz
        for i in range(n):
            p[i] = z[i] + beta * p[i]
        rz = rz_new
        it += 1
    return it, res


def _pcg_numpy(A, b, x, tol, max_iter, use_sgs):
    bnorm = float(np.sqrt(b @ b))
    if bnorm == 0.0:
        x[:] = 0.0
        return 0, 0.0
    diag = A.diagonal()
    if use_sgs:
        lower = sparse.tril(A, 0).tocsr()
        upper = sparse.triu(A, 0).tocsr()

        def precond(r):
            y = spsolve_triangular(lower, r, lower=True)
            return spsolve_triangular(upper, diag * y, lower=False)
    else:
        def precond(r):
            return r / diag

    r = b - A @ x
    z = precond(r)
    p = z.copy()
    rz = float(r @ z)
    res = float(np.sqrt(r @ r)) / bnorm
    it = 0
    while res > tol and it < max_iter:
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = float(np.sqrt(r @ r)) / bnorm
        if not np.isfinite(res):
            return -it, res
        z = precond(r)
        rz_new = float(r @ z)
        p = z + rz_new / rz * p
        rz = rz_new
        it += 1
    return it, res


class SolverNaNError(FloatingPointError):
    """The iteration produced a non-finite residual."""


def pcg(A: sparse.csr_matrix, b: np.ndarray, tol: float = 1e-10,
        max_iter: int = 50_000, precond: str = "sgs",
        backend: str | None = None):
    """Solve A x = b (SPD) to ||r||/||b|| <= tol; returns (x, iters, relres).

    The relative residual of the returned iterate is re-verified against the
    true residual; the iteration restarts from the current iterate if
    round-off drift spoiled the recursive estimate.
    """
    be = resolve_backend(backend)
    use_sgs = precond == "sgs"
    if precond not in ("sgs", "jacobi"):
        raise ValueError(f"unknown preconditioner {precond!r}")
    A = A.tocsr()
    A.sort_indices()
    x = np.zeros_like(b)
    bnorm = float(np.sqrt(b @ b))
    total_it = 0
    for _ in range(4):  # restarts cover residual-recurrence drift
        if be == "numba":
            it, res = _pcg_numba(
                A.indptr, A.indices, A.data, A.diagonal(), b, x,
                tol, max_iter - total_it, use_sgs,
            )
        else:
            it, res = _pcg_numpy(A, b, x, tol, max_iter - total_it, use_sgs)
        if it < 0 or not np.isfinite(res):
            raise SolverNaNError(f"non-finite residual after {-it + total_it} iterations")
        total_it += it
        if bnorm == 0.0:
            return x, total_it, 0.0
        true_res = float(np.linalg.norm(b - A @ x)) / bnorm
        if true_res <= tol:
            return x, total_it, true_res
        if total_it >= max_iter:
            break
    raise NonConvergenceError(total_it, true_res)


class NonConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"PCG did not converge: {iterations} iterations, "
            f"relative residual {residual:.3e}"
        )


def warmup():
    """Trigger numba compilation on a tiny system (no-op for numpy backend)."""
    if resolve_backend() != "numba":
        return
    A = sparse.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    pcg(A, np.array([1.0, 0.0]), tol=1e-12, max_iter=10)
