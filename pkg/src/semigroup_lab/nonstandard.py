"""A second completely positive perturbation that resets lost normalization.

Given a (generally trace-losing) generator g, the modified generator

    g_hat(rho) = g(rho) - tr(g rho) * rho_hat

re-injects the instantaneous normalization loss into the state rho_hat.  It
coincides with g wherever g is trace free (all interior finite-rank
elements), differs exactly by rho_hat on elements with unit flux, and
generates a conservative semigroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .birth import band_domain_element, birth_generator, birth_resolvent, \
    conservativity_defect
from .operators import as_operator, is_positive_semidefinite, \
    matrix_exponential_apply, rank_one, trace_norm
from .rates import RateSequence


@dataclass(frozen=True)
class TraceResetGenerator:
    """g_hat = g - tr(g .) rho_hat for a base generator map g."""

    base: Callable[[np.ndarray], np.ndarray]
    reset_state: np.ndarray

    def __post_init__(self):
        state = as_operator(self.reset_state)
        if abs(np.trace(state) - 1.0) > 1e-12:
            raise ValueError("reset state must have unit trace")
        if not is_positive_semidefinite(state, tol=1e-12):
            raise ValueError("reset state must be positive semidefinite")
        object.__setattr__(self, "reset_state", state)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = as_operator(rho)
        if rho.shape != self.reset_state.shape:
            raise ValueError("operator dimension does not match the reset state")
        out = self.base(rho)
        return out - np.trace(out) * self.reset_state


@dataclass(frozen=True)
class ContractionReport:
    """Spectral data of the rank-one reset perturbation composed with the
    base resolvent: the scalar p11 and the observed decay of its powers."""

    p11: float
    norms: tuple
    ratios: tuple


@dataclass(frozen=True)
class FalsifierReport:
    """Numerical ingredients of the non-standardness argument."""

    interior_max_deviation: float
    reset_difference_trace_norm: float
    base_defect: float
    reset_residual: float

    def consistent(self, defect_floor: float = 0.0) -> bool:
        return (self.interior_max_deviation <= 1e-12
                and abs(self.reset_difference_trace_norm - 1.0) <= 1e-10
                and self.base_defect > defect_floor
                and self.reset_residual <= 1e-9)


def conservativity_residual(gen: Callable[[np.ndarray], np.ndarray],
                            rho: np.ndarray, t: float) -> float:
    """|1 - tr exp(t gen) rho| for a unit-trace positive rho."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    rho = as_operator(rho)
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("rho must have unit trace")
    if t == 0:
        return 0.0
    evolved = matrix_exponential_apply(gen, t, rho)
    return float(abs(1.0 - np.real(np.trace(evolved))))


def reset_contraction_report(resolvent: Callable[[float, np.ndarray], np.ndarray],
                             reset_state: np.ndarray, lam: float,
                             powers: int = 20) -> ContractionReport:
    """Check that the reset perturbation is a strict contraction through the
    base resolvent.

    The composed map P R_lam sends rho to (tr rho - lam tr R_lam rho) *
    reset_state, so its action on the span of the reset state is the scalar
    p11 = 1 - lam tr R_lam(reset_state); |p11| < 1 makes the powers decay
    geometrically and keeps the perturbed domain equal to the base domain.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    state = as_operator(reset_state)

    def p_r(rho: np.ndarray) -> np.ndarray:
        defect = np.trace(rho) - lam * np.trace(resolvent(lam, rho))
        return defect * state

    p11 = float(np.real(1.0 - lam * np.trace(resolvent(lam, state))))
    norms = []
    w = state
    for _ in range(powers):
        w = p_r(w)
        norms.append(trace_norm(w))
    ratios = tuple(
        norms[i + 1] / norms[i] for i in range(len(norms) - 1) if norms[i] > 0
    )
    return ContractionReport(p11=p11, norms=tuple(norms), ratios=ratios)


def falsifier_report(rates: RateSequence, dim: int,
                     reset_state: np.ndarray = None, lam: float = 1.0,
                     t: float = 1.0, trials: int = 100,
                     seed: int = 0) -> FalsifierReport:
    """Collect the three numerical ingredients of non-standardness for the
    birth instance.

    (i)  g_hat equals g on random interior finite-rank elements;
    (ii) g_hat differs from g by exactly the reset state on the diagonal
         band element, whose flux is one;
    (iii) the base semigroup loses normalization (positive defect) while the
         reset semigroup preserves it.
    """
    spec = birth_generator(rates, dim)
    if reset_state is None:
        reset_state = np.zeros((dim, dim), dtype=complex)
        reset_state[0, 0] = 1.0
    gen_hat = TraceResetGenerator(base=spec, reset_state=reset_state)

    rng = np.random.default_rng(seed)
    interior_dev = 0.0
    for _ in range(trials):
        phi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        phi[-1] = psi[-1] = 0.0
        rho = rank_one(phi / np.linalg.norm(phi), psi / np.linalg.norm(psi))
        interior_dev = max(interior_dev,
                           float(np.abs(gen_hat(rho) - spec(rho)).max()))

    sigma = band_domain_element(rates, 0, dim)
    reset_diff = trace_norm(gen_hat(sigma) - spec(sigma))

    state = gen_hat.reset_state
    defect = conservativity_defect(rates, lam, state)
    residual = conservativity_residual(gen_hat, state, t)
    return FalsifierReport(interior_max_deviation=interior_dev,
                           reset_difference_trace_norm=reset_diff,
                           base_defect=defect,
                           reset_residual=residual)


def birth_reset_resolvent_series(rates: RateSequence, dim: int, lam: float,
                                 rho: np.ndarray, reset_state: np.ndarray,
                                 tol: float = 1e-10):
    """Resolvent series of the reset generator, built on the closed-form
    birth resolvent as the unperturbed part."""
    from .resolvent import resolvent_series

    spec = birth_generator(rates, dim)
    state = as_operator(reset_state)

    def perturbation(x: np.ndarray) -> np.ndarray:
        return -np.trace(spec(x)) * state

    return resolvent_series(lambda x: birth_resolvent(rates, lam, x),
                            perturbation, lam, rho, tol=tol)
