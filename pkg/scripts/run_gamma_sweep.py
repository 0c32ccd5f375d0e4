#!/usr/bin/env python3
"""Gamma sweep over the conflict-share grid.

The full grid (9 gamma values x 4 imbalanced datasets + the balanced run,
10 repetitions each) takes hours on one core; the default here is a small
demonstration slice.  Pass --full for the whole grid.
"""

import argparse
import sys

from graphica.cli import main as graphica


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--out", default="out-sweep")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--full", action="store_true",
                        help="run the complete grid at 10 repetitions")
    args = parser.parse_args()

    cmd = ["sweep", "--seed", str(args.seed), "-o", args.out]
    if not args.full:
        cmd += ["--gamma-grid", "0.0", "2.0", "--datasets", "10", "40",
                "--reps", "2"]
    print(f"$ graphica {' '.join(cmd)}", file=sys.stderr)
    return graphica(cmd)


if __name__ == "__main__":
    sys.exit(main())
