"""The quantum birth process on finite truncations.

A particle on the levels 0, 1, 2, ... jumps from n to n+1 at rate mu_n.  The
quantum version is the standard generator with K = diag(-mu_n/2) and a single
jump operator L|n> = sqrt(mu_n)|n+1>, acting entrywise as

    (G rho)[n, m] = -(mu_n + mu_m)/2 * rho[n, m]
                    + sqrt(mu_{n-1} mu_{m-1}) * rho[n-1, m-1].

Because the jump moves indices strictly upward, the resolvent of the full
generator can be summed in closed form: entry (n, m) only involves finitely
many entries of the input, via products of factors

    sqrt(mu_{n-j} mu_{m-j}) / (lambda + (mu_{n-j} + mu_{m-j})/2) < 1.

This makes the closed form exact on the truncation and provides the oracle
for every other resolvent route in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .generators import StandardGeneratorSpec
from .operators import as_operator
from .rates import ExplicitRates, GeometricRates, RateRangeError, RateSequence

EntryAccessor = Union[np.ndarray, Callable[[int, int], complex]]


@dataclass(frozen=True)
class ArrivalBracket:
    """Truncated infinite product with a rigorous enclosure [lower, upper]."""

    value: float
    lower: float
    upper: float
    n_factors: int
    list_exhausted: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class GrowthReport:
    """Outcome of the moderate-growth probe |1 - mu_{n+q}/mu_n| <= c/n."""

    moderate: bool
    c_of_q: dict
    uniform_c: float
    witness: Optional[tuple]


@dataclass(frozen=True)
class BandDecayTable:
    """Band functional of a resolvent output along n, with its geometric
    envelope sum_k gamma^k r_{n-k}."""

    q: int
    gamma: float
    n_values: tuple
    f_values: tuple
    envelope: tuple


@dataclass(frozen=True)
class LeadingColumnReport:
    """Deviation of the resolvent's first nonzero column from the
    one-dimensional formula (lambda + mu_m/2 - K)^{-1} rho|m>."""

    column: int
    max_deviation: float


def birth_generator(rates: RateSequence, dim: int) -> StandardGeneratorSpec:
    """Truncated birth generator: diagonal K, single raising jump.

    The jump out of the top level is cut (absorbing truncation), which keeps
    the generator dissipative, with equality on levels below dim-1.
    """
    if dim < 2:
        raise ValueError("need at least two levels")
    mu = rates.mu_array(0, dim)
    k = np.diag(-0.5 * mu).astype(complex)
    l = np.zeros((dim, dim), dtype=complex)
    l[np.arange(1, dim), np.arange(dim - 1)] = np.sqrt(mu[:-1])
    return StandardGeneratorSpec(K=k, jumps=(l,))


def classical_birth_apply(rates: RateSequence, p: Sequence[float]) -> np.ndarray:
    """Classical birth generator on a probability vector.

    (Gp)(n) = mu_{n-1} p(n-1) - mu_n p(n) with p(-1) = 0; the outflow from the
    top represented level is kept while its inflow target is dropped, so the
    total sums to -mu_{N-1} p(N-1).
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("p must be a nonempty vector")
    mu = rates.mu_array(0, p.size)
    out = -mu * p
    out[1:] += mu[:-1] * p[:-1]
    return out


def birth_generator_apply(rates: RateSequence, a: np.ndarray) -> np.ndarray:
    """Entrywise birth generator, valid for arbitrary matrices.

    This is the extension of the generator beyond finite-rank inputs; on the
    truncation it coincides with apply_standard of birth_generator.
    """
    a = as_operator(a)
    dim = a.shape[0]
    mu = rates.mu_array(0, dim)
    root = np.sqrt(mu[:-1])
    out = -0.5 * (mu[:, None] + mu[None, :]) * a
    out[1:, 1:] += np.outer(root, root) * a[:-1, :-1]
    return out


def no_event_resolvent(rates: RateSequence, lam: float, rho: np.ndarray) -> np.ndarray:
    """Resolvent of the no-event part alone: entrywise division by
    lambda + (mu_n + mu_m)/2."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rho = as_operator(rho)
    mu = rates.mu_array(0, rho.shape[0])
    return rho / (lam + 0.5 * (mu[:, None] + mu[None, :]))


def birth_resolvent(rates: RateSequence, lam: float, rho: np.ndarray) -> np.ndarray:
    """Closed-form resolvent of the full birth generator.

    Entry (n, m) is the finite sum over k <= min(n, m) of the product weights
    applied to rho[n-k, m-k], divided by lambda + (mu_n + mu_m)/2.  Exact on
    all represented entries because inflow only moves indices upward.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rho = as_operator(rho)
    dim = rho.shape[0]
    mu = rates.mu_array(0, dim)
    root = np.sqrt(mu)
    denom = lam + 0.5 * (mu[:, None] + mu[None, :])
    weight = np.outer(root, root) / denom
    out = rho.astype(complex).copy()
    # accumulate sum_k p^k rho[n-k, m-k] by shifting a running product:
    # S_k[i, j] = p^k_{i+k, j+k} rho[i, j] and S_{k+1} = S_k[:-1,:-1] * w[k:,k:]
    shifted = rho.astype(complex)
    for k in range(1, dim):
        shifted = shifted[:-1, :-1] * weight[k - 1:-1, k - 1:-1]
        if not shifted.any():
            break
        out[k:, k:] += shifted
    return out / denom


def birth_resolvent_entry(rates: RateSequence, lam: float, rho: EntryAccessor,
                          n: int, m: int) -> complex:
    """Single entry of the closed-form resolvent.

    `rho` may be an ndarray or a callable (n, m) -> entry; the callable form
    allows probing indices far beyond any stored truncation.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    entry = _entry_accessor(rho)
    mu_n, mu_m = rates.mu(n), rates.mu(m)
    total = entry(n, m)
    p = 1.0
    for k in range(1, min(n, m) + 1):
        a, b = rates.mu(n - k), rates.mu(m - k)
        # sqrt before multiplying: a*b overflows long before sqrt(a)*sqrt(b)
        p *= math.sqrt(a) * math.sqrt(b) / (lam + 0.5 * (a + b))
        if p == 0.0:
            break
        total += p * entry(n - k, m - k)
    return total / (lam + 0.5 * (mu_n + mu_m))


def _entry_accessor(rho: EntryAccessor) -> Callable[[int, int], complex]:
    if callable(rho):
        return rho
    mat = as_operator(rho)

    def entry(n: int, m: int) -> complex:
        if 0 <= n < mat.shape[0] and 0 <= m < mat.shape[1]:
            return complex(mat[n, m])
        return 0.0

    return entry


def arrival_partial_product(rates: RateSequence, lam: float, n_start: int,
                            count: int) -> float:
    """Product of 1/(1 + lambda/mu_j) over exactly `count` factors."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    mu = rates.mu_array(n_start, count)
    return float(np.prod(1.0 / (1.0 + lam / mu)))


def arrival_laplace(rates: RateSequence, lam: float, n_start: int = 0,
                    tail_tol: float = 1e-12, max_factors: int = 10 ** 7
                    ) -> ArrivalBracket:
    """Laplace transform of the arrival-at-infinity density, as the infinite
    product prod_{j >= n_start} 1/(1 + lambda/mu_j).

    When sum_j 1/mu_j diverges the product is exactly zero (conservative
    case) and is returned as such without iterating.  Otherwise factors are
    multiplied until either the bound sum_{j>=J} lambda/mu_j on the remaining
    tail certifies a bracket narrower than tail_tol, or the partial product
    itself drops below tail_tol.  Explicit lists are never extrapolated: the
    product over the listed range is returned with a flag, and it is an
    error when the list runs out while the tail is not provably negligible.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    if lam == 0:
        return ArrivalBracket(value=1.0, lower=1.0, upper=1.0, n_factors=0)
    if isinstance(rates, ExplicitRates):
        count = len(rates.values) - n_start
        if count <= 0:
            raise RateRangeError(f"explicit list has no rates from {n_start} on")
        product = arrival_partial_product(rates, lam, n_start, count)
        if product > tail_tol:
            raise RateRangeError(
                f"explicit rate list too short: partial product {product:.3e} "
                f"over {count} factors leaves a tail that is not provably "
                "negligible"
            )
        return ArrivalBracket(value=product, lower=0.0, upper=product,
                              n_factors=count, list_exhausted=True)
    if math.isinf(rates.inverse_tail(n_start)):
        return ArrivalBracket(value=0.0, lower=0.0, upper=0.0, n_factors=0)
    product = 1.0
    j = n_start
    while j - n_start < max_factors:
        product /= 1.0 + lam / rates.mu(j)
        j += 1
        if product <= tail_tol:
            return ArrivalBracket(value=product, lower=0.0, upper=product,
                                  n_factors=j - n_start)
        tail = lam * rates.inverse_tail(j)
        if tail < tail_tol:
            # 1/(1+x) >= exp(-x) for x >= 0, so the neglected tail of the
            # product lies in [exp(-tail), 1]
            lower = product * math.exp(-tail)
            return ArrivalBracket(value=product, lower=lower, upper=product,
                                  n_factors=j - n_start)
    raise RuntimeError(f"no certified bracket after {max_factors} factors")


def conservativity_defect(rates: RateSequence, lam: float, rho: np.ndarray) -> float:
    """Normalization loss in Laplace picture: 1 - lambda * tr(R_lambda rho)
    over the truncation carried by rho."""
    rho = as_operator(rho)
    return 1.0 - lam * float(np.real(np.trace(birth_resolvent(rates, lam, rho))))


def band_functional(rates: RateSequence, rho: EntryAccessor, q: int,
                    n_probe: int, tol: float = 1e-2):
    """Probe the limit of F(n) = (mu_n + mu_{n+q})/2 * <n|rho|n+q>.

    The limit exists for every generator-domain element; it vanishes on the
    no-event domain and picks out the normalization flux for q = 0.  Returns
    (F(n_probe), converged) where convergence compares the probe against the
    half-way point n_probe // 2.
    """
    if n_probe < 2:
        raise ValueError("n_probe must be at least 2")
    if n_probe + q < 0 or n_probe // 2 + q < 0:
        raise RateRangeError("probe indices must be nonnegative")
    entry = _entry_accessor(rho)
    if not callable(rho):
        mat_dim = as_operator(rho).shape[0]
        if n_probe + max(q, 0) >= mat_dim:
            raise RateRangeError(
                f"probe {n_probe} (+q={q}) outside stored truncation {mat_dim}"
            )

    def f(n: int) -> complex:
        return 0.5 * (rates.mu(n) + rates.mu(n + q)) * entry(n, n + q)

    estimate = f(n_probe)
    converged = abs(estimate - f(n_probe // 2)) < tol
    return estimate, bool(converged)


def band_domain_element(rates: RateSequence, q: int, dim: int) -> np.ndarray:
    """Band matrix sum_n 2/(mu_n + mu_{n+q}) |n><n+q| on the truncation.

    For q = 0 this is the diagonal state with entries 1/mu_n whose trace
    grows to the expected explosion time; under moderate rate growth it lies
    in the generator domain with unit normalization flux.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if dim <= q:
        raise ValueError("truncation too small for the requested band")
    mu = rates.mu_array(0, dim)
    out = np.zeros((dim, dim), dtype=complex)
    n = np.arange(dim - q)
    out[n, n + q] = 2.0 / (mu[n] + mu[n + q])
    return out


def band_entry(rates: RateSequence, q: int) -> Callable[[int, int], complex]:
    """Lazy entry accessor for the band element, usable at any probe index."""
    if q < 0:
        raise ValueError("q must be nonnegative")

    def entry(n: int, m: int) -> complex:
        if m - n == q and n >= 0:
            return 2.0 / (rates.mu(n) + rates.mu(m))
        return 0.0

    return entry


def am_gm_gap(a: float, b: float) -> float:
    """(sqrt(a) - sqrt(b))^2 / (a + b): the arithmetic/geometric mean gap
    1 - 2 sqrt(ab)/(a+b), bounded by (1 - b/a)^2."""
    if a <= 0 or b <= 0:
        raise ValueError("arguments must be positive")
    return (math.sqrt(a) - math.sqrt(b)) ** 2 / (a + b)


def moderate_growth_report(rates: RateSequence, q_max: int, n_max: int
                           ) -> GrowthReport:
    """Probe n * |1 - mu_{n+q}/mu_n| for q = 1..q_max, n = 1..n_max.

    `c_of_q[q]` is the largest probed value.  The sequence counts as moderate
    when it plateaus: the maximum over the last decade of n must not exceed
    1.05 times the running bound established before it (per q).  Reports a
    per-q constant, the uniform constant over all probed q, and a violating
    (q, n) pair when not moderate.
    """
    if q_max < 1 or n_max < 20:
        raise ValueError("need q_max >= 1 and n_max >= 20")
    c_of_q = {}
    moderate = True
    witness = None
    cutoff = n_max // 10
    for q in range(1, q_max + 1):
        n = np.arange(1, n_max + 1)
        ratios = rates.mu_array(1 + q, n_max) / rates.mu_array(1, n_max)
        values = n * np.abs(1.0 - ratios)
        c_of_q[q] = float(values.max())
        early = float(values[:cutoff].max())
        late = float(values[cutoff:].max())
        if late > 1.05 * early:
            moderate = False
            if witness is None:
                n_bad = int(cutoff + 1 + np.argmax(values[cutoff:]))
                witness = (q, n_bad)
    return GrowthReport(moderate=moderate, c_of_q=c_of_q,
                        uniform_c=float(max(c_of_q.values())), witness=witness)


def geometric_band_decay(rates: RateSequence, q: int, lam: float,
                         rho: EntryAccessor, n_values: Sequence[int]
                         ) -> BandDecayTable:
    """Decay table of the band functional along a resolvent output for
    geometrically growing rates mu_n = a^n.

    Every product factor on the q-th band is bounded by
    gamma = 2 a^{q/2} / (1 + a^q) < 1, so F(n) is dominated by the
    convolution envelope sum_k gamma^k |<n-k|rho|n-k+q>| and decays to zero.
    Products are accumulated in log space to dodge premature underflow.
    """
    if not isinstance(rates, GeometricRates):
        raise TypeError("geometric_band_decay requires geometric rates")
    if q < 1:
        raise ValueError("q must be at least 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    a = rates.a
    gamma = 2.0 * a ** (q / 2.0) / (1.0 + a ** q)
    entry = _entry_accessor(rho)
    f_values = []
    envelope = []
    for n in sorted(int(v) for v in n_values):
        m = n + q
        log_p = 0.0
        total = entry(n, m)
        env = abs(entry(n, m))
        for k in range(1, n + 1):
            mu_a, mu_b = rates.mu(n - k), rates.mu(m - k)
            log_p += 0.5 * (math.log(mu_a) + math.log(mu_b)) \
                - math.log(lam + 0.5 * (mu_a + mu_b))
            r = entry(n - k, m - k)
            if r != 0.0:
                total += math.exp(log_p) * r
            env += gamma ** k * abs(r)
        mid = 0.5 * (rates.mu(n) + rates.mu(m))
        f_values.append(abs(mid / (lam + mid) * total))
        envelope.append(env)
    return BandDecayTable(q=q, gamma=gamma,
                          n_values=tuple(sorted(int(v) for v in n_values)),
                          f_values=tuple(f_values), envelope=tuple(envelope))


def leading_column_report(rates: RateSequence, lam: float, rho: np.ndarray
                          ) -> LeadingColumnReport:
    """Check the column identity behind "no new pure states".

    With m the smallest index for which rho|m> != 0, the resolvent column
    R_lambda rho |m> must equal (lambda + mu_m/2 - K)^{-1} rho|m>, i.e. the
    k = 0 term alone survives.
    """
    rho = as_operator(rho)
    cols = np.abs(rho).sum(axis=0)
    nonzero = np.nonzero(cols)[0]
    if nonzero.size == 0:
        raise ValueError("rho must be nonzero")
    m = int(nonzero[0])
    dim = rho.shape[0]
    mu = rates.mu_array(0, dim)
    resolved = birth_resolvent(rates, lam, rho)[:, m]
    expected = rho[:, m] / (lam + 0.5 * (mu[m] + mu))
    return LeadingColumnReport(column=m,
                               max_deviation=float(np.abs(resolved - expected).max()))
