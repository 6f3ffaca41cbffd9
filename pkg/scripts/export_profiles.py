#!/usr/bin/env python3
"""Write t,J(t) tables for the built-in measures plus I_γ and I₀, ready for plotting."""

import argparse
import csv
from pathlib import Path

from isoperimetrix.measures import build
from isoperimetrix.profiles import comparator_I0, gaussian_profile, profile_of, profile_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="profiles")
    ap.add_argument("--points", type=int, default=1024)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    profiles = {s.replace(":", "_").replace(",", "_"): profile_of(build(s))
                for s in ("gaussian", "exponential", "exp_alpha:1.5", "uniform:0,1", "cusp:0.5")}
    profiles["I_gamma"] = gaussian_profile()
    profiles["I0"] = comparator_I0()
    for name, p in profiles.items():
        t, v = profile_table(p, args.points)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "J(t)"])
            w.writerows(zip(t.tolist(), v.tolist()))
        print(out / f"{name}.csv")


if __name__ == "__main__":
    main()
