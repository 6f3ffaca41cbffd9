#!/usr/bin/env python3
"""C_{N,q} and adjoint comparability across q in [1, 2] for φ_q(t) = t^q log(1 + t^q)."""

import argparse

import numpy as np

from isoperimetrix import hierarchy as H


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=9)
    args = ap.parse_args()
    print(f"{'q':>6}{'C_Nq':>10}{'c1':>10}{'c2':>10}{'lo':>12}")
    for q in np.linspace(1.0, 2.0, args.count):
        led = H.qls_bridge(float(q), 1.0, "to_iso").ledger
        rep = led.reported
        print(f"{q:>6.3f}{rep['C_Nq']:>10.4f}{rep['wedge_c1']:>10.4f}{rep['wedge_c2']:>10.4f}{led.lo:>12.4g}")


if __name__ == "__main__":
    main()
