#!/usr/bin/env python3
"""Euler reconstruction of the birth semigroup from its resolvent.

Tabulates the trace-norm error of ((n/t) R_{n/t})^n rho against the dense
matrix exponential; the error decays like C/n.
"""

import argparse

import numpy as np

from semigroup_lab import (
    birth_generator,
    birth_resolvent,
    euler_semigroup,
    matrix_exponential_apply,
    trace_norm,
)
from semigroup_lab.rates import parse_rate_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rates", default="poly:1:2")
    ap.add_argument("--N", type=int, default=5)
    ap.add_argument("--t", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rates = parse_rate_spec(args.rates)
    spec = birth_generator(rates, args.N)
    rng = np.random.default_rng(args.seed)
    a = rng.standard_normal((args.N, args.N)) + 1j * rng.standard_normal((args.N, args.N))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real

    reference = matrix_exponential_apply(spec, args.t, rho)
    print(f"rates {args.rates}, N={args.N}, t={args.t}")
    print(f"{'n':>8}  {'error':>12}  {'n * error':>12}")
    for p in range(6, 15):
        n = 2 ** p
        euler = euler_semigroup(lambda lam, x: birth_resolvent(rates, lam, x),
                                args.t, n, rho)
        err = trace_norm(euler - reference)
        print(f"{n:>8}  {err:>12.3e}  {n * err:>12.6f}")


if __name__ == "__main__":
    main()
