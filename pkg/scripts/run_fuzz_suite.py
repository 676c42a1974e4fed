#!/usr/bin/env python3
"""Run the full randomized verification gate and write a stats file.

Defaults reproduce the acceptance configuration: 10^4 trials over dims 2-6,
1-4 observables, pure and full-rank states, every relation group, and the
f labels wy / sld / wyd:0.3.
"""

import argparse
import time

from skewsharp.fuzz import FuzzConfig, run_fuzz
from skewsharp.serialize import dumps, write_text


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=20240501)
    ap.add_argument("--out", default="fuzz_stats.json")
    ap.add_argument("--reproducer-dir", default=".")
    args = ap.parse_args()

    cfg = FuzzConfig(trials=args.trials, seed=args.seed,
                     reproducer_dir=args.reproducer_dir)
    t0 = time.perf_counter()
    stats = run_fuzz(cfg)
    elapsed = time.perf_counter() - t0

    write_text(args.out, dumps(stats.to_dict()))
    print(f"{'relation':14s} {'trials':>7s} {'violations':>10s} {'min rel margin':>15s}")
    for rid, rel in sorted(stats.per_relation.items()):
        print(f"{rid:14s} {rel.trials:7d} {rel.violations:10d} {rel.min_rel_margin:15.3e}")
    print(f"\n{stats.total_trials} trials, {stats.total_violations} violations, "
          f"{elapsed:.1f}s; stats written to {args.out}")
    return 0 if stats.total_violations == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
