"""Stochastic realization of the birth process, plus the half-sided shift
arrival-density demo.

Each trajectory consumes its own deterministic substream keyed by
(master_seed, index); identical keys reproduce identical trajectories no
matter in which order or on how many workers they are drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .birth import birth_generator, no_event_resolvent
from .generators import apply_jump
from .operators import as_operator
from .rates import RateSequence

_CHUNK = 64


class BiasCheckError(RuntimeError):
    """Trajectory truncation bias is not negligible against the Monte Carlo
    standard error; increase max_jumps."""


@dataclass(frozen=True)
class TrajectoryStreams:
    """Splittable, counter-addressable random streams for trajectories."""

    master_seed: int

    def stream(self, index: int) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.master_seed, spawn_key=(index,))
        )


@dataclass(frozen=True)
class TrajectorySample:
    jump_times: np.ndarray
    final_level: int
    exploded_within_horizon: bool
    horizon: float


@dataclass(frozen=True)
class ShiftArrivalTable:
    """Arrival density |psi(t)|^2 of the half-sided shift at the origin."""

    times: np.ndarray
    density: np.ndarray
    cumulative: np.ndarray
    norm_sq: float


def sample_trajectory(rates: RateSequence, n_start: int, horizon: float,
                      max_jumps: int = 10_000,
                      rng: Optional[np.random.Generator] = None
                      ) -> TrajectorySample:
    """Draw one trajectory: exponential holding times -ln(U)/mu_n, U in (0,1].

    Stops at the horizon or after max_jumps jumps; the explosion flag is set
    when the max_jumps-th jump still falls inside the horizon.
    """
    if rng is None:
        raise ValueError("an explicit random stream is required for reproducibility")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if max_jumps < 1:
        raise ValueError("max_jumps must be at least 1")
    times = []
    level = int(n_start)
    t = 0.0
    while len(times) < max_jumps:
        chunk = min(_CHUNK, max_jumps - len(times))
        mu = rates.mu_array(level, chunk)
        u = 1.0 - rng.random(chunk)             # uniform in (0, 1]
        holds = -np.log(u) / mu
        cum = t + np.cumsum(holds)
        inside = cum <= horizon
        n_in = int(inside.sum())
        times.extend(cum[:n_in].tolist())
        level += n_in
        if n_in < chunk:
            return TrajectorySample(jump_times=np.array(times),
                                    final_level=level,
                                    exploded_within_horizon=False,
                                    horizon=horizon)
        t = cum[-1]
    return TrajectorySample(jump_times=np.array(times), final_level=level,
                            exploded_within_horizon=True, horizon=horizon)


def sample_trajectories(rates: RateSequence, n_start: int, horizon: float,
                        max_jumps: int, streams: TrajectoryStreams,
                        count: int) -> list:
    """Draw `count` trajectories on streams 0..count-1."""
    return [
        sample_trajectory(rates, n_start, horizon, max_jumps, streams.stream(i))
        for i in range(count)
    ]


def empirical_laplace(samples: Sequence[TrajectorySample], lam: float,
                      rates: RateSequence):
    """Monte Carlo estimate of E[exp(-lambda T)] over explosion times T.

    Trajectories stopped by the horizon contribute the one-sided upper bound
    exp(-lambda * horizon), per the estimator's contract.  Trajectories that
    hit the jump cap truncate the explosion time; their mean residual
    holding time (bounded by the inverse-rate tail) must stay below the
    standard error, otherwise BiasCheckError is raised.

    Returns (mean, standard_error).
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if not samples:
        raise ValueError("no samples")
    values = np.empty(len(samples))
    bias = 0.0
    for i, s in enumerate(samples):
        if s.exploded_within_horizon:
            t = s.jump_times[-1]
            values[i] = math.exp(-lam * t)
            # unobserved tail of the explosion time shifts exp(-lam T) by
            # at most lam * E[tail]
            bias += lam * rates.inverse_tail(s.final_level)
        else:
            values[i] = math.exp(-lam * s.horizon)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    bias /= len(samples)
    if lam > 0 and bias > max(se, 1e-15):
        raise BiasCheckError(
            f"truncation bias bound {bias:.3e} exceeds standard error {se:.3e}; "
            "increase max_jumps or the horizon"
        )
    return mean, se


def n_event_laplace_term(rates: RateSequence, lam: float, k: int,
                         rho: np.ndarray) -> float:
    """Laplace weight of the k-event sector: tr(R0 (P R0)^k rho) for the
    birth model."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    rho = as_operator(rho)
    spec = birth_generator(rates, rho.shape[0])
    w = no_event_resolvent(rates, lam, rho)
    for _ in range(k):
        w = no_event_resolvent(rates, lam, apply_jump(spec, w))
    return float(np.real(np.trace(w)))


def event_count_estimator(samples: Sequence[TrajectorySample], lam: float,
                          k: int):
    """Monte Carlo companion of n_event_laplace_term:
    mean of (exp(-lam T_k) - exp(-lam T_{k+1}))/lam with T_0 = 0 and jump
    times capped at the horizon.  Returns (mean, standard_error)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    values = np.empty(len(samples))
    for i, s in enumerate(samples):
        t_k = s.jump_times[k - 1] if k >= 1 and len(s.jump_times) >= k else (
            0.0 if k == 0 else s.horizon)
        t_next = s.jump_times[k] if len(s.jump_times) >= k + 1 else s.horizon
        values[i] = (math.exp(-lam * t_k) - math.exp(-lam * t_next)) / lam
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return mean, se


def shift_arrival_density(psi: Sequence[complex], h: float,
                          t_grid: Optional[Sequence[float]] = None
                          ) -> ShiftArrivalTable:
    """Arrival density of the half-sided shift at the origin.

    `psi` holds samples of the wave function on the uniform grid x_i = i*h.
    The density at time t is |psi(t)|^2 (the shifted boundary value) and its
    cumulative never exceeds the squared norm of psi.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 2:
        raise ValueError("psi must be a vector of at least two samples")
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    x = h * np.arange(psi.size)
    profile = np.abs(psi) ** 2
    norm_sq = float(np.trapezoid(profile, dx=h))
    if t_grid is None:
        times = x
        density = profile.copy()
    else:
        times = np.asarray(t_grid, dtype=float)
        if np.any(times < 0) or np.any(np.diff(times) <= 0):
            raise ValueError("arrival times must be nonnegative and increasing")
        density = np.interp(times, x, profile, right=0.0)
    cumulative = np.concatenate(
        [[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(times))]
    )
    return ShiftArrivalTable(times=times, density=density,
                             cumulative=cumulative, norm_sq=norm_sq)
