"""Ratio of each leading-order variant to the oracle as T grows.

The "printed" variant keeps the uncorrected prefactor scalings;
"corrected" uses the scalings confirmed against the oracle.  Rows where
the two coincide are included as controls.

Run: python scripts/printed_vs_corrected.py
"""

from __future__ import annotations

import sys

from ousldp.inversion import oracle_tail
from ousldp.sldp import tail_probability, zero_threshold_exact

CASES = ((1.0, 0.5), (1.0, -1.0), (-1.0, -1.0 / 3.0), (1.0, 2.0), (-1.0, -2.0))
TS = (10.0, 20.0, 40.0, 80.0)


def main() -> int:
    print(f"{'theta':>6} {'c':>8} {'T':>5} {'regime':>22} {'corrected/or':>13} {'printed/or':>12}")
    for theta, c in CASES:
        for T in TS:
            o = oracle_tail(theta, c, T).probability
            cor = tail_probability(theta, c, T, 0, "corrected")
            pr = tail_probability(theta, c, T, 0, "printed")
            print(f"{theta:6g} {c:8.4f} {T:5g} {cor.regime.value:>22} {cor.raw / o:13.6f} {pr.raw / o:12.6f}")
    print("\nzero threshold, theta = 1, order 1: relative error of each variant")
    for T in (2.0, 5.0, 10.0):
        cor = zero_threshold_exact(1.0, T, 1, "corrected", dps=60).extras["rel_error"]
        pr = zero_threshold_exact(1.0, T, 1, "printed", dps=60).extras["rel_error"]
        print(f"T={T:4g}  corrected {cor:.3e}  printed {pr:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
