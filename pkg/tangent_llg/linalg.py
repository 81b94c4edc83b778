import math
from collections import namedtuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from tangent_llg import constants
from tangent_llg.errors import InvalidArgument

SolveReport = namedtuple("SolveReport", ["iterations", "relative_residual", "converged", "method"])


def from_arrays(nrows, ncols, rows, cols, values):
    """CSR matrix from coordinate arrays; duplicates are summed."""
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if not (rows.size == cols.size == values.size):
        raise InvalidArgument("triplet arrays differ in length")
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols:
            raise InvalidArgument("triplet index out of range", f"shape ({nrows}, {ncols})")
    matrix = sp.coo_matrix((values, (rows, cols)), shape=(nrows, ncols)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def from_triplets(nrows, ncols, entries):
    entries = list(entries)
    if not entries:
        return sp.csr_matrix((nrows, ncols))
    rows, cols, values = zip(*entries)
    return from_arrays(nrows, ncols, rows, cols, values)


def _check_system(A, b):
    if A.shape[0] != A.shape[1]:
        raise InvalidArgument("matrix must be square", f"shape {A.shape}")
    b = np.asarray(b, dtype=float).ravel()
    if b.size != A.shape[0]:
        raise InvalidArgument("right-hand side length mismatch", f"{b.size} vs {A.shape[0]}")
    return b


def _relative_residual(A, x, b, b_norm):
    return float(np.linalg.norm(A @ x - b) / b_norm)


def jacobi_preconditioner(A):
    diag = A.diagonal()
    inv = 1.0 / np.where(diag != 0.0, diag, 1.0)
    n = A.shape[0]
    return spla.LinearOperator((n, n), matvec=lambda x: inv * np.ravel(x), dtype=float)


def solve(A, b, tol=constants.DEFAULT_SOLVER_TOL, maxit=None):
    """Jacobi-preconditioned restarted GMRES.

    Convergence is judged on the true residual ||Ax - b|| <= tol ||b||; a few
    restarts from the last iterate recover what the preconditioned residual
    test leaves behind.
    """
    A = sp.csr_matrix(A)
    b = _check_system(A, b)
    n = A.shape[0]
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, "gmres")
    if maxit is None:
        maxit = 10 * n
    restart = max(1, min(n, 50))
    counter = {"iterations": 0}

    def count(_):
        counter["iterations"] += 1

    precond = jacobi_preconditioner(A)
    x = np.zeros(n)
    residual = 1.0
    for _ in range(4):
        remaining = maxit - counter["iterations"]
        if remaining <= 0:
            break
        x, _info = spla.gmres(
            A,
            b,
            x0=x,
            rtol=tol,
            atol=0.0,
            restart=restart,
            maxiter=max(1, math.ceil(remaining / restart)),
            M=precond,
            callback=count,
            callback_type="pr_norm",
        )
        residual = _relative_residual(A, x, b, b_norm)
        if residual <= tol:
            break
    return x, SolveReport(counter["iterations"], residual, residual <= tol, "gmres")


def solve_direct(A, b, tol=constants.DEFAULT_SOLVER_TOL):
    """Sparse LU; used when the Krylov solve misses the tolerance."""
    A = sp.csc_matrix(A)
    b = _check_system(A, b)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(A.shape[0]), SolveReport(0, 0.0, True, "splu")
    x = spla.spsolve(A, b)
    residual = _relative_residual(A, x, b, b_norm)
    return x, SolveReport(1, residual, residual <= tol, "splu")


def solve_dense(A, b):
    """Dense LU oracle for small systems."""
    dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if dense.shape[0] > constants.DENSE_LIMIT:
        raise InvalidArgument("dense solve limited to small systems", f"n={dense.shape[0]} > {constants.DENSE_LIMIT}")
    if dense.shape[0] != dense.shape[1] or b.size != dense.shape[0]:
        raise InvalidArgument("dimension mismatch", f"{dense.shape} vs {b.size}")
    return np.linalg.solve(dense, b)
