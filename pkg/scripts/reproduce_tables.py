#!/usr/bin/env python3
"""Reproduce the selector-comparison grids on the real KDDTrain+ file.

Needs the NSL-KDD training split on disk. Point IDSPIPE_DATA at the
directory holding KDDTrain+.txt (or pass the file path directly). Draws the
62,984-record reference sample, then runs every selection method at both
label granularities and writes the comparison tables plus the per-attack
F-measure breakdown.
"""

import argparse
import os
import sys
from pathlib import Path

from idspipe.pipeline import reproduce_tables


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "train_file",
        nargs="?",
        default="KDDTrain+.txt",
        help="path to KDDTrain+.txt (default: resolve via IDSPIPE_DATA)",
    )
    ap.add_argument("--out", default="reproduction", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rounds", type=int, default=10)
    ap.add_argument("--k", type=int, default=10)
    args = ap.parse_args()

    path = Path(args.train_file)
    if not path.exists():
        root = os.environ.get("IDSPIPE_DATA")
        if root and (Path(root) / args.train_file).exists():
            path = Path(root) / args.train_file
        else:
            sys.exit(
                f"cannot find {args.train_file}; set IDSPIPE_DATA to the "
                "directory holding the NSL-KDD files"
            )

    written = reproduce_tables(
        str(path), args.out, seed=args.seed, rounds=args.rounds, k=args.k, sample=True
    )
    for name in sorted(written):
        print(f"wrote {written[name]}")
    print((Path(args.out) / "selector_comparison_23class.txt").read_text())


if __name__ == "__main__":
    main()
