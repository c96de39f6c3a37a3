#!/usr/bin/env python3
"""Conservativity dichotomy for the quantum birth process.

Compares two rate families at a fixed resolvent parameter: with linearly
growing rates the escape defect vanishes as the truncation grows, while for
geometric rates it converges to the positive arrival product.
"""

import argparse

from semigroup_lab import arrival_laplace, conservativity_defect, matrix_unit
from semigroup_lab.rates import parse_rate_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rates", default=["poly:1:1", "geom:2"], nargs="+",
                    help="rate specs to compare")
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--dims", type=int, nargs="+",
                    default=[10, 20, 40, 80, 160])
    args = ap.parse_args()

    for spec_text in args.rates:
        rates = parse_rate_spec(spec_text)
        bracket = arrival_laplace(rates, args.lam)
        print(f"\nrates {spec_text}: arrival product = {bracket.value:.12g} "
              f"(bracket width {bracket.width:.1e})")
        print(f"{'N':>6}  {'defect(N)':>16}  {'defect - product':>18}")
        for dim in args.dims:
            defect = conservativity_defect(rates, args.lam,
                                           matrix_unit(0, 0, dim))
            print(f"{dim:>6}  {defect:>16.12f}  {defect - bracket.value:>18.3e}")


if __name__ == "__main__":
    main()
