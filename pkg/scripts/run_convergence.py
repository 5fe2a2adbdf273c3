#!/usr/bin/env python3
"""Per-vertex tree entropy on growing cycles or tori, written as CSV.

    python3 scripts/run_convergence.py --family torus2d --sizes 8 16 32 --seed 0 --out torus.csv
"""

import argparse
import sys
import time

from detent.experiments import METHODS, ConvergenceConfig, convergence_rows, rows_to_csv


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", choices=("cycle", "torus2d"), default="torus2d")
    p.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32])
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--roots", type=int, default=20)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--kmax", type=int, default=10_000)
    p.add_argument("--out")
    args = p.parse_args(argv)
    cfg = ConvergenceConfig(args.family, tuple(sorted(args.sizes)), tuple(args.methods), args.seed,
                            args.radius, args.roots, args.samples, args.kmax)
    t0 = time.perf_counter()
    text = rows_to_csv(convergence_rows(cfg))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"# {time.perf_counter() - t0:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
