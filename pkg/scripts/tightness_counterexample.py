#!/usr/bin/env python3
"""K4 against the doubled 3-star: same local statistics, different entropy.

Both transfer currents are placed on the edgeless graph over their edges,
so every ball is a single element and the two ball laws coincide.  The
tightness profile puts mass 1/4 at infinite distance in both cases.
"""

import argparse
import json
import math

from detent.cli import dumps
from detent.experiments import tightness_counterexample


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--radii", type=int, nargs="+", default=[0, 1, 2, 3])
    p.add_argument("--out")
    args = p.parse_args(argv)
    res = tightness_counterexample(tuple(args.radii))
    text = dumps(res)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(json.dumps(json.loads(text), indent=2))
    g = res["graphs"]
    print(f"# H(K4) = {g['complete']['entropy']:.6f} (log 16 = {math.log(16):.6f}), "
          f"H(star) = {g['doubled_star']['entropy']:.6f} (log 8 = {math.log(8):.6f})")


if __name__ == "__main__":
    main()
