#!/usr/bin/env python3
"""Cusp measures |x|^α: zero Cheeger and Gaussian constants, positive Poincaré bracket."""

import argparse
import json

from isoperimetrix import hierarchy as H
from isoperimetrix.measures import build
from isoperimetrix.profiles import cheeger_constant, gaussian_constant, profile_of


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    args = ap.parse_args()
    rows = []
    for a in args.alphas:
        m = build(f"cusp:{a}")
        prof = profile_of(m, refine=True)
        br = H.poincare_bracket(m)
        rows.append({"alpha": a, "cheeger": cheeger_constant(prof), "gaussian": gaussian_constant(prof),
                     "poincare_lo": br.lo, "poincare_hi": br.hi})
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
