"""Small dense linear-algebra kernel used by the sweeps and the analysis code.

Everything here operates on plain numpy arrays. Matrices are tiny (at most a
few hundred rows), so robustness and clear failure modes matter more than
asymptotic performance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class SingularMatrixError(ValueError):
    """Raised when a pivot falls below the singularity tolerance."""

    def __init__(self, pivot_index: int, message: str | None = None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix singular to tolerance at pivot {pivot_index}")


class EigenConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real matrix, ordered by descending modulus."""

    eigenvalues: np.ndarray  # complex, sorted

    @property
    def spectral_radius(self) -> float:
        if self.eigenvalues.size == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))


def lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b by LU with partial pivoting.

    Raises SingularMatrixError (naming the offending pivot) when a pivot of
    U is below 1e-14 * ||A||_inf.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if b.shape[0] != A.shape[0]:
        raise ValueError("dimension mismatch between A and b")
    norm_A = np.max(np.sum(np.abs(A), axis=1)) if A.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    tol = 1e-14 * norm_A
    bad = np.where(diag <= tol)[0]
    if bad.size:
        raise SingularMatrixError(int(bad[0]))
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def unpivoted_lu(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Doolittle factorization A = L U with unit lower-triangular L, no pivoting.

    Used for the preconditioner built from the transposed integration matrix,
    which is defined by this exact (unpivoted) factorization.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    U = A.copy()
    L = np.eye(n)
    for k in range(n - 1):
        if U[k, k] == 0.0:
            raise SingularMatrixError(k, f"zero pivot at index {k} in unpivoted LU")
        factors = U[k + 1:, k] / U[k, k]
        L[k + 1:, k] = factors
        U[k + 1:, k:] -= np.outer(factors, U[k, k:])
    if U[n - 1, n - 1] == 0.0:
        raise SingularMatrixError(n - 1, f"zero pivot at index {n - 1} in unpivoted LU")
    return L, np.triu(U)


def eigenvalues(A: np.ndarray) -> Spectrum:
    """Dense eigenvalues of a real square matrix (size <= 64).

    Output ordering is deterministic: descending modulus, ties broken by
    descending real part, then descending imaginary part.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if A.shape[0] > 64:
        raise ValueError("eigenvalues() is restricted to matrices of size <= 64")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    try:
        vals = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise EigenConvergenceError(str(exc)) from exc
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return Spectrum(eigenvalues=vals[order])


def spectral_radius(A: np.ndarray) -> float:
    return eigenvalues(A).spectral_radius
