#!/usr/bin/env python3
"""End-to-end experiment: synthesize, train, evaluate, report.

Reproduces the default setup (10 apps / 13 parameters / 10 KPIs, 570 rows
at 10% conflict share, gamma 2.0) and leaves every artifact in the output
directory.  All stages run through the command line interface, so the
written files match what `graphica <stage>` would produce.
"""

import argparse
import sys

from graphica.cli import main as graphica


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--out", default="out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--rows", type=int, default=570)
    parser.add_argument("--conflict", type=float, default=0.10)
    parser.add_argument("--gamma", type=float, default=2.0)
    args = parser.parse_args()

    out = args.out
    common = ["--seed", str(args.seed), "-o", out]
    steps = [
        ["synth", "--rows", str(args.rows), "--conflict", str(args.conflict)]
        + common,
        ["train", "-d", f"{out}/dataset.csv", "-t", f"{out}/topology.json",
         "--gamma", str(args.gamma)] + common,
        ["eval", "-d", f"{out}/dataset.csv", "-t", f"{out}/topology.json",
         "-m", out] + common,
        ["report", "-d", f"{out}/dataset.csv", "-t", f"{out}/topology.json",
         "-m", f"{out}/fold0.ckpt", "--fold", "0"] + common,
    ]
    for step in steps:
        print(f"$ graphica {' '.join(step)}", file=sys.stderr)
        code = graphica(step)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
