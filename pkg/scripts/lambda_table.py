#!/usr/bin/env python3
"""Tabulate the minimization constant for the monotone-function catalog.

For each f the table lists the minimum of F(x) = (1 + x - f_*(x)) / (2 f(x)),
its argmin, the proved bracket [1 - f(0), min(1, 1/(4 f(0)))], and whether the
minimum lands on the upper end (the conjectured value).
"""

import argparse

from skewsharp.gcov import lambda_f, resolve_monotone


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--labels", default="sld,wy,wyd:0.4,wyd:0.3,wyd:0.2,wyd:0.1,wyd:0.05",
                    help="comma-separated catalog labels")
    args = ap.parse_args()

    print(f"{'f':10s} {'f(0)':>8s} {'lambda':>14s} {'argmin x':>12s} "
          f"{'lower':>8s} {'upper':>8s} {'conjecture':>10s}")
    for label in args.labels.split(","):
        f = resolve_monotone(label.strip())
        res = lambda_f(f)
        print(f"{f.label:10s} {f.f0:8.4f} {res.lam:14.10f} {res.argmin_x:12.4e} "
              f"{res.lower_bound:8.4f} {res.upper_bound:8.4f} "
              f"{'match' if res.conjecture_match else 'open':>10s}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
