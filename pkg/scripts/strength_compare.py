#!/usr/bin/env python3
"""Compare the lower bounds the two-observable relations place on |L+||L-|.

Random two-observable instances (plus the saturating qubit fixture) are scored
against the squared-commutator bound and the tighter discriminant-derived
bound; the asserted orderings are counted and the rest reported as empirical
frequencies.
"""

import argparse

import numpy as np

from skewsharp.fuzz import FuzzConfig, strength_study
from skewsharp.linalg import DensityMatrix
from skewsharp.skew import ObservableSet

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20240501)
    ap.add_argument("--rows", type=int, default=10, help="sample rows to print")
    args = ap.parse_args()

    q1 = (DensityMatrix.from_matrix(np.diag([0.75, 0.25]).astype(complex)),
          ObservableSet.from_matrices([SX, SY]))
    cfg = FuzzConfig(dims=(2, 3, 4, 5, 6), n_obs=(2,), trials=args.trials,
                     seed=args.seed, f_labels=("wy", "sld"))
    study = strength_study(cfg, fixed_instances=[q1])

    print(f"{'inst':>5s} {'B=|L+||L-|':>13s} {'bound eq3':>13s} {'bound eq9a':>13s} "
          f"{'eq9a slack':>12s} {'wy-strongest':>13s}")
    for row in study.rows[: args.rows]:
        print(f"{row['instance']:5d} {row['B']:13.4e} {row['bound_eq3']:13.4e} "
              f"{row['bound_eq9a']:13.4e} {row['margin_eq9a']:12.3e} "
              f"{row.get('wy_strongest_margin', float('nan')):13.3e}")
    print("\nsummary:")
    for key, val in study.summary.items():
        print(f"  {key}: {val}")
    bad = study.summary["ordering_violations"]
    return 0 if all(v == 0 for v in bad.values()) else 1


if __name__ == "__main__":
    raise SystemExit(main())
