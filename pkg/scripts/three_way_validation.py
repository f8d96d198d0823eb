"""SLDP (orders 0 and 1) vs Fourier-inversion oracle vs tilted Monte Carlo.

Run: python scripts/three_way_validation.py [--n-paths 1000000] [--seed 5]
"""

from __future__ import annotations

import argparse
import sys
import time

from ousldp.inversion import oracle_tail
from ousldp.simulate import tilted_mc_tail
from ousldp.sldp import tail_probability

CASES = ((-1.0, -2.0, 10.0), (1.0, 2.0, 10.0), (1.0, 0.5, 10.0), (1.0, -1.0, 10.0))


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-paths", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=5)
    args = p.parse_args(argv)
    head = f"{'theta':>6} {'c':>6} {'T':>5} {'oracle':>12} {'sldp0/or':>9} {'sldp1/or':>9} {'mc/or':>9} {'z':>6} {'sec':>5}"
    print(head)
    for theta, c, T in CASES:
        t0 = time.perf_counter()
        o = oracle_tail(theta, c, T).probability
        s0 = tail_probability(theta, c, T, 0).raw
        s1 = tail_probability(theta, c, T, 1).raw
        m = tilted_mc_tail(theta, c, T, n_paths=args.n_paths, seed=args.seed)
        z = (m.estimate - o) / m.std_error
        print(f"{theta:6g} {c:6g} {T:5g} {o:12.5e} {s0 / o:9.4f} {s1 / o:9.4f} {m.estimate / o:9.4f} "
              f"{z:6.2f} {time.perf_counter() - t0:5.0f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
