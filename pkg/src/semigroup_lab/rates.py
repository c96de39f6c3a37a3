"""Birth-rate sequences and the text grammar used by the CLI and configs.

Grammar (numbers are decimal, optional exponent, strictly positive):

    poly:<c>:<p>      mu_n = c * (n+1)**p
    geom:<a>          mu_n = a**n
    const:<c>         mu_n = c
    list:<v1>,<v2>,.. explicit rates; queries past the end are errors

Parsing emits errors with a character offset; printing produces a canonical
form that round-trips.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


class RateSpecError(ValueError):
    """Malformed rate-spec text; `offset` is the character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class RateRangeError(IndexError):
    """Query beyond the range on which the rates are defined."""


class RateSequence:
    """Base for positive rate sequences mu_0, mu_1, ..."""

    def mu(self, n: int) -> float:
        raise NotImplementedError

    def mu_array(self, start: int, count: int) -> np.ndarray:
        return np.array([self.mu(n) for n in range(start, start + count)])

    def inverse_tail(self, start: int) -> float:
        """Upper bound on sum_{j >= start} 1/mu_j, finite whenever the true
        sum converges (so inf certifies divergence).

        For explicit lists only the listed range is summed; there is no tail
        to bound.
        """
        raise NotImplementedError


def _check_index(n: int) -> int:
    n = int(n)
    if n < 0:
        raise RateRangeError(f"rate index must be nonnegative, got {n}")
    return n


@dataclass(frozen=True)
class PolynomialRates(RateSequence):
    """mu_n = c * (n+1)**p."""

    c: float
    p: float

    def __post_init__(self):
        if not (self.c > 0 and self.p > 0):
            raise ValueError("polynomial rates need c > 0 and p > 0")

    def mu(self, n: int) -> float:
        n = _check_index(n)
        return self.c * float(n + 1) ** self.p

    def mu_array(self, start: int, count: int) -> np.ndarray:
        _check_index(start)
        return self.c * (np.arange(start, start + count) + 1.0) ** self.p

    def inverse_tail(self, start: int) -> float:
        _check_index(start)
        if self.p <= 1:
            return math.inf
        # sum_{j>=s} (j+1)^{-p} <= integral_s^inf x^{-p} dx, valid for s >= 1
        s = max(start, 1)
        head = sum(1.0 / self.mu(j) for j in range(start, s))
        return head + s ** (1.0 - self.p) / ((self.p - 1.0) * self.c)


@dataclass(frozen=True)
class GeometricRates(RateSequence):
    """mu_n = a**n."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("geometric rates need a > 0")

    def mu(self, n: int) -> float:
        return self.a ** _check_index(n)

    def mu_array(self, start: int, count: int) -> np.ndarray:
        _check_index(start)
        return self.a ** np.arange(start, start + count, dtype=float)

    def inverse_tail(self, start: int) -> float:
        _check_index(start)
        if self.a <= 1:
            return math.inf
        return self.a ** (-start) / (1.0 - 1.0 / self.a)


@dataclass(frozen=True)
class ConstantRates(RateSequence):
    """mu_n = c."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("constant rates need c > 0")

    def mu(self, n: int) -> float:
        _check_index(n)
        return self.c

    def mu_array(self, start: int, count: int) -> np.ndarray:
        _check_index(start)
        return np.full(count, self.c)

    def inverse_tail(self, start: int) -> float:
        _check_index(start)
        return math.inf


@dataclass(frozen=True)
class ExplicitRates(RateSequence):
    """A finite list of rates with no tail; never extrapolates."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("explicit rate list must be non-empty")
        if any(not v > 0 for v in self.values):
            raise ValueError("explicit rates must all be positive")

    def mu(self, n: int) -> float:
        n = _check_index(n)
        if n >= len(self.values):
            raise RateRangeError(
                f"rate index {n} beyond explicit list of length {len(self.values)}"
            )
        return self.values[n]

    def mu_array(self, start: int, count: int) -> np.ndarray:
        if start + count > len(self.values):
            raise RateRangeError(
                f"rate range [{start}, {start + count}) beyond explicit list "
                f"of length {len(self.values)}"
            )
        return np.array(self.values[start:start + count])

    def inverse_tail(self, start: int) -> float:
        _check_index(start)
        return sum(1.0 / v for v in self.values[start:])


def _parse_number(text: str, offset: int, what: str) -> float:
    token = text.strip()
    if not token:
        raise RateSpecError(f"empty {what}", offset)
    if not _NUMBER.match(token):
        raise RateSpecError(f"malformed number {token!r} in {what}", offset)
    value = float(token)
    if not value > 0:
        raise RateSpecError(f"{what} must be strictly positive, got {token!r}", offset)
    return value


def parse_rate_spec(text: str) -> RateSequence:
    """Parse the rate grammar; raises RateSpecError with a character offset."""
    if not isinstance(text, str):
        raise RateSpecError("rate spec must be a string", 0)
    head, sep, rest = text.partition(":")
    if not sep:
        raise RateSpecError(f"missing ':' after rate kind in {text!r}", len(text))
    body_at = len(head) + 1
    if head == "poly":
        c_text, sep2, p_text = rest.partition(":")
        if not sep2:
            raise RateSpecError("poly needs two parameters 'poly:<c>:<p>'", len(text))
        c = _parse_number(c_text, body_at, "poly coefficient")
        p = _parse_number(p_text, body_at + len(c_text) + 1, "poly exponent")
        return PolynomialRates(c=c, p=p)
    if head == "geom":
        return GeometricRates(a=_parse_number(rest, body_at, "geometric ratio"))
    if head == "const":
        return ConstantRates(c=_parse_number(rest, body_at, "constant rate"))
    if head == "list":
        if not rest.strip():
            raise RateSpecError("empty rate list", body_at)
        values = []
        at = body_at
        for item in rest.split(","):
            values.append(_parse_number(item, at, "list entry"))
            at += len(item) + 1
        return ExplicitRates(values=tuple(values))
    raise RateSpecError(f"unknown rate kind {head!r}", 0)


def format_rate_spec(rates: RateSequence) -> str:
    """Canonical text form; parse(format(r)) == r."""
    if isinstance(rates, PolynomialRates):
        return f"poly:{rates.c!r}:{rates.p!r}"
    if isinstance(rates, GeometricRates):
        return f"geom:{rates.a!r}"
    if isinstance(rates, ConstantRates):
        return f"const:{rates.c!r}"
    if isinstance(rates, ExplicitRates):
        return "list:" + ",".join(repr(v) for v in rates.values)
    raise TypeError(f"unknown rate sequence type {type(rates)!r}")
