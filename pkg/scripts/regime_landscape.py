"""Regime landscape: rate, SLDP and oracle tail probabilities over a (theta, c, T) grid.

Writes one CSV row per (theta, c, T, method); points without an expansion
appear as rows with a reason instead of aborting the sweep.

Run: python scripts/regime_landscape.py [--output landscape.csv]
"""

from __future__ import annotations

import argparse
import sys

from ousldp.cli import RunConfig, render, run_command


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--output", default="-")
    p.add_argument("--thetas", default="-1,0,1")
    p.add_argument("--cs", default="-2,-1,-0.5,-0.3333333333333333,0,0.5,1,2")
    p.add_argument("--Ts", default="10,20,40")
    args = p.parse_args(argv)
    cfg = RunConfig(
        command="table",
        thetas=[float(x) for x in args.thetas.split(",")],
        cs=[float(x) for x in args.cs.split(",")],
        Ts=[float(x) for x in args.Ts.split(",")],
        methods=["sldp", "oracle"],
        format="csv",
    )
    status, report = run_command(cfg)
    text = render(report, "csv")
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
