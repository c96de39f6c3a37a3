"""Dense complex-matrix substrate for truncated trace-class operators.

Operators on the first N basis levels are plain complex ndarrays of shape
(N, N), entry (n, m) = <n|rho|m>.  Everything here is a pure function; all
heavy lifting is delegated to LAPACK via numpy/scipy.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.linalg import expm

SELFADJOINT_RTOL = 1e-12


class MatrixExponentialError(RuntimeError):
    """Raised when the reference exponential produces non-finite values."""


def as_operator(a) -> np.ndarray:
    """Validate and coerce a matrix to a square, finite complex ndarray."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("operator entries must be finite")
    return a


def is_selfadjoint(a: np.ndarray, rtol: float = SELFADJOINT_RTOL) -> bool:
    """True when max |a[n,m] - conj(a[m,n])| <= rtol * max(1, maxabs(a))."""
    a = as_operator(a)
    dev = np.abs(a - a.conj().T).max()
    return bool(dev <= rtol * max(1.0, np.abs(a).max()))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values (nuclear norm)."""
    a = as_operator(a)
    return float(np.linalg.svd(a, compute_uv=False).sum())


def is_positive_semidefinite(a: np.ndarray, tol: float = 0.0) -> bool:
    """True when the minimal eigenvalue is >= -tol * max(1, trace_norm(a)).

    The input must be self-adjoint (within the standard tolerance);
    non-self-adjoint matrices are rejected rather than symmetrized silently.
    """
    a = as_operator(a)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if not is_selfadjoint(a):
        raise ValueError("is_positive_semidefinite requires a self-adjoint matrix")
    lo = float(np.linalg.eigvalsh(a).min())
    return lo >= -tol * max(1.0, trace_norm(a))


def rank_one(phi, psi) -> np.ndarray:
    """|phi><psi| as a matrix: entry (n, m) = phi[n] * conj(psi[m])."""
    phi = np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if phi.ndim != 1 or psi.ndim != 1 or phi.shape != psi.shape:
        raise ValueError("rank_one requires two vectors of equal length")
    return np.outer(phi, psi.conj())


def matrix_unit(i: int, j: int, dim: int) -> np.ndarray:
    """Matrix unit E_ij on a dim-level truncation."""
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


def superop_matrix(superop: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Dense dim^2 x dim^2 matrix of a linear map, column by column.

    Vectorization is row-major: E_ij maps to column i*dim + j.
    """
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            out = np.asarray(superop(matrix_unit(i, j, dim)), dtype=complex)
            if out.shape != (dim, dim):
                raise ValueError(
                    f"superoperator output has shape {out.shape}, expected {(dim, dim)}"
                )
            m[:, i * dim + j] = out.ravel()
    return m


def choi_matrix(superop: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Block matrix with (i, j) block superop(E_ij); PSD iff the map is CP."""
    c = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            out = np.asarray(superop(matrix_unit(i, j, dim)), dtype=complex)
            if out.shape != (dim, dim):
                raise ValueError(
                    f"superoperator output has shape {out.shape}, expected {(dim, dim)}"
                )
            c[i * dim:(i + 1) * dim, j * dim:(j + 1) * dim] = out
    return c


def matrix_exponential_apply(
    gen: Callable[[np.ndarray], np.ndarray],
    t: float,
    rho: np.ndarray,
    tol: float = 1e-12,
) -> np.ndarray:
    """Reference exp(t*gen) applied to rho.

    Uses Pade scaling-and-squaring on the dense superoperator matrix; the
    squaring count grows only logarithmically with the generator norm, so
    stiff generators stay affordable.  Backward error sits well below `tol`
    in double precision for the sizes this package targets.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    rho = as_operator(rho)
    if t == 0:
        return rho.copy()
    dim = rho.shape[0]
    out = (matrix_exponential_operator(gen, t, dim) @ rho.ravel()).reshape(dim, dim)
    if not np.all(np.isfinite(out.view(float))):
        raise MatrixExponentialError("matrix exponential did not converge to finite values")
    return out


def matrix_exponential_operator(
    gen: Callable[[np.ndarray], np.ndarray], t: float, dim: int
) -> np.ndarray:
    """Dense matrix of exp(t*gen) for re-use across many inputs."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    out = expm(t * superop_matrix(gen, dim))
    if not np.all(np.isfinite(out.view(float))):
        raise MatrixExponentialError("matrix exponential did not converge to finite values")
    return out
