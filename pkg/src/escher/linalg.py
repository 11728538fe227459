"""Sparse linear solves used by the time steppers and diagnostics."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import IncompatibleRHS, IterativeBreakdown, SingularMatrix


def lu_factor(A):
    """Sparse LU with partial pivoting; raises SingularMatrix on failure."""
    try:
        return spla.splu(sp.csc_matrix(A))
    except RuntimeError as exc:
        raise SingularMatrix(str(exc)) from exc


def solve_sparse(A, b, method="lu"):
    """Solve a square nonsingular sparse system.

    ``method='lu'`` uses sparse LU with partial pivoting (the default);
    ``method='bicgstab'`` uses BiCGStab with diagonal preconditioning as a
    memory-light fallback for large systems.
    """
    b = np.asarray(b, dtype=float)
    if method == "lu":
        return lu_factor(A).solve(b)
    if method == "bicgstab":
        diag = A.diagonal()
        if np.any(diag == 0.0):
            precond = None
        else:
            precond = spla.LinearOperator(A.shape, lambda v: v / diag)
        x, info = spla.bicgstab(A, b, M=precond, rtol=1e-12, atol=0.0,
                                maxiter=20 * A.shape[0])
        if info != 0:
            raise IterativeBreakdown(f"bicgstab failed with info={info}")
        return x
    raise ValueError(f"unknown linear solver {method!r}")


def solve_mean_zero_spd(A, b, M, rtol=1e-12):
    """Solve the singular SPD system ``A x = b`` with ``1^T M x = 0``.

    ``A`` is a stiffness matrix whose kernel is the constants, so ``b`` must
    satisfy the compatibility condition ``1^T b = 0``; conjugate gradients
    stay in the compatible subspace and the kernel component is fixed by an
    M-weighted mean shift at the end.
    """
    b = np.asarray(b, dtype=float)
    scale = np.linalg.norm(b)
    if abs(b.sum()) > 1e-10 * max(scale, 1.0):
        raise IncompatibleRHS(
            f"sum(b) = {b.sum():.3e} is not zero relative to |b| = {scale:.3e}"
        )
    if scale == 0.0:
        return np.zeros_like(b)
    diag = A.diagonal()
    precond = spla.LinearOperator(A.shape, lambda v: v / diag)
    x, info = spla.cg(A, b, M=precond, rtol=rtol, atol=0.0,
                      maxiter=50 * A.shape[0])
    if info != 0:
        raise IterativeBreakdown(f"cg failed with info={info}")
    lumped = np.asarray(M.sum(axis=1)).ravel()
    return x - lumped @ x / lumped.sum()
