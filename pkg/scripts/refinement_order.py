"""Grid-refinement study of the discretised MLE.

Each path is refined by exact OU-bridge midpoints, so successive grids share
one underlying continuous path.  Prints RMS and mean change of theta_hat per
halving and the observed order log2(rms_k / rms_{k+1}).

Run: python scripts/refinement_order.py [--theta -1] [--T 5] [--paths 300]
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ousldp.simulate import mle_estimate, refine_path, simulate_path


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--theta", type=float, default=-1.0)
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--paths", type=int, default=300)
    p.add_argument("--base-steps", type=int, default=50)
    p.add_argument("--levels", type=int, default=6)
    args = p.parse_args(argv)
    diffs = []
    for seed in range(args.paths):
        path = simulate_path(args.theta, args.T, args.base_steps, seed)
        est = [mle_estimate(path)]
        for k in range(args.levels):
            path = refine_path(path, 1_000_000 + seed * 100 + k)
            est.append(mle_estimate(path))
        diffs.append(np.diff(est))
    d = np.asarray(diffs)
    rms = np.sqrt(np.mean(d * d, axis=0))
    mean = d.mean(axis=0)
    print(f"{'steps':>8} {'rms change':>12} {'mean change':>12} {'order':>6}")
    for k in range(args.levels):
        order = np.log2(rms[k - 1] / rms[k]) if k else float("nan")
        print(f"{args.base_steps * 2 ** (k + 1):8d} {rms[k]:12.3e} {mean[k]:12.3e} {order:6.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
