#!/usr/bin/env python3
"""Write a synthetic NSL-KDD-format record file for demos and smoke tests."""

import argparse

from idspipe.synth import write_synthetic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="output path for the record file")
    ap.add_argument("-n", type=int, default=5000, help="number of records")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument(
        "--no-difficulty",
        action="store_true",
        help="emit 42-field lines without the difficulty column",
    )
    args = ap.parse_args()
    write_synthetic(args.out, args.n, seed=args.seed, difficulty=not args.no_difficulty)
    print(f"wrote {args.n} records to {args.out}")


if __name__ == "__main__":
    main()
