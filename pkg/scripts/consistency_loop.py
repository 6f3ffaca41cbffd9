#!/usr/bin/env python3
"""Profile -> Orlicz-Sobolev constant -> profile bound, with the loss factor per instance."""

import argparse

from isoperimetrix import hierarchy as H
from isoperimetrix.measures import build
from isoperimetrix.orlicz import power


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--measures", nargs="+", default=["exponential", "gaussian", "exp_alpha:1.5"])
    ap.add_argument("--qs", type=float, nargs="+", default=[1.0, 1.5, 2.0, 3.0])
    args = ap.parse_args()
    print(f"{'measure':<16}{'q':>5}{'D_iso':>12}{'D_os':>12}{'loss':>10}  holds")
    for spec in args.measures:
        m = build(spec)
        for q in args.qs:
            r = H.consistency_loop(m, power(q), q)
            print(f"{spec:<16}{q:>5g}{r['D_iso']:>12.5g}{r['D_os']:>12.5g}{r['loss_factor']:>10.4g}  {r['holds']}")


if __name__ == "__main__":
    main()
