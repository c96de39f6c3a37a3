"""Resolvent calculus: direct solves, the minimal-solution series, and the
Euler reconstruction of the semigroup from its resolvent.

The direct resolvent treats a superoperator as a dense dim^2 x dim^2 matrix
and solves (lambda - G) X = rho.  The series builds the perturbed resolvent

    R_lambda = sum_n R0 (P R0)^n

whose partial sums are exactly the monotone iterates of the minimal-solution
construction; for positive inputs their traces increase to the limit and
never exceed tr(rho).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .operators import as_operator, is_positive_semidefinite, is_selfadjoint, \
    superop_matrix, trace_norm


class SeriesDivergenceError(RuntimeError):
    """The resolvent series increments stopped decreasing and exceed their
    initial size; a fixed point of P R0 would make the series diverge."""


@dataclass
class ResolventSeriesResult:
    value: np.ndarray
    iterations: int
    trace_trajectory: list
    converged: bool


def resolvent_direct(gen: Callable[[np.ndarray], np.ndarray], lam: float,
                     rho: np.ndarray) -> np.ndarray:
    """Solve (lambda - gen) X = rho by a dense linear solve."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rho = as_operator(rho)
    dim = rho.shape[0]
    m = superop_matrix(gen, dim)
    a = lam * np.eye(dim * dim, dtype=complex) - m
    x = np.linalg.solve(a, rho.ravel())
    return x.reshape(dim, dim)


def direct_resolvent_factory(gen: Callable[[np.ndarray], np.ndarray], dim: int
                             ) -> Callable[[float, np.ndarray], np.ndarray]:
    """Reusable (lam, rho) -> resolvent solver, LU-factored once per lambda."""
    m = superop_matrix(gen, dim)
    eye = np.eye(dim * dim, dtype=complex)
    cache: dict = {}

    def solve(lam: float, rho: np.ndarray) -> np.ndarray:
        if lam <= 0:
            raise ValueError("lambda must be positive")
        if lam not in cache:
            cache[lam] = lu_factor(lam * eye - m)
        rho = as_operator(rho)
        return lu_solve(cache[lam], rho.ravel()).reshape(dim, dim)

    return solve


def resolvent_series(r0: Callable[[np.ndarray], np.ndarray],
                     perturbation: Callable[[np.ndarray], np.ndarray],
                     lam: float, rho: np.ndarray,
                     tol: float = 1e-10, max_iter: int = 10 ** 6
                     ) -> ResolventSeriesResult:
    """Sum the perturbed-resolvent series sum_n R0 (P R0)^n applied to rho.

    `r0` is the unperturbed resolvent at the given lambda and `perturbation`
    the completely positive perturbation.  For a positive input the
    normalization condition tr(P(R0 rho)) <= tr(rho) is verified up front.
    Stops when the trace-norm increment is below `tol` both absolutely and
    relative to the accumulated value.  A growing increment that fails to
    decrease over 100 consecutive steps raises SeriesDivergenceError instead
    of truncating silently.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rho = as_operator(rho)
    if is_selfadjoint(rho) and is_positive_semidefinite(rho, tol=1e-12):
        witness = np.real(np.trace(perturbation(r0(rho))))
        budget = np.real(np.trace(rho))
        if witness > budget + 1e-10 * max(1.0, budget):
            raise ValueError(
                "perturbation is not dominated by the no-event loss: "
                f"tr P(R0 rho) = {witness:.6e} > tr rho = {budget:.6e}"
            )
    term = r0(rho)
    value = term.copy()
    trajectory = [lam * float(np.real(np.trace(value)))]
    w = rho
    first_increment = None
    trailing_min = np.inf
    stalled = 0
    converged = False
    n = 0
    for n in range(1, max_iter + 1):
        w = perturbation(r0(w))
        term = r0(w)
        value += term
        trajectory.append(lam * float(np.real(np.trace(value))))
        inc = trace_norm(term)
        if first_increment is None:
            first_increment = inc
        if inc < trailing_min:
            trailing_min = inc
            stalled = 0
        else:
            stalled += 1
        if inc <= tol and inc <= tol * max(trace_norm(value), 1e-300):
            converged = True
            break
        if stalled >= 100 and inc > first_increment:
            raise SeriesDivergenceError(
                f"series increment {inc:.3e} has not decreased for {stalled} "
                f"iterations and exceeds its initial value {first_increment:.3e}"
            )
    return ResolventSeriesResult(value=value, iterations=n,
                                 trace_trajectory=trajectory,
                                 converged=converged)


def euler_semigroup(resolvent: Callable[[float, np.ndarray], np.ndarray],
                    t: float, n: int, rho: np.ndarray) -> np.ndarray:
    """Reconstruct exp(tG) rho as ((n/t) R_{n/t})^n rho.

    For n exceeding dim^2 the n-fold application is carried out by binary
    powering of the dense resolvent matrix.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    rho = as_operator(rho)
    lam = n / t
    dim = rho.shape[0]
    if n <= dim * dim:
        out = rho
        for _ in range(n):
            out = lam * resolvent(lam, out)
        return out
    b = lam * superop_matrix(lambda x: resolvent(lam, x), dim)
    return (np.linalg.matrix_power(b, n) @ rho.ravel()).reshape(dim, dim)


def domain_element(resolvent: Callable[[float, np.ndarray], np.ndarray],
                   lam: float, rho_prime: np.ndarray):
    """Canonical generator-domain element R_lam rho' with its generator action
    lam R_lam rho' - rho'."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rho_prime = as_operator(rho_prime)
    element = resolvent(lam, rho_prime)
    return element, lam * element - rho_prime
