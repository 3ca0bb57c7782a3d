#!/usr/bin/env python3
"""Barrier height and instantaneous power along several update-rate schedules.

Writes one CSV per schedule (n, epsilon, r, tilt_kt, barrier_kt, power_w)
and prints a short summary: power at n = 1, final barrier, feasibility.
"""

import argparse
import csv
from pathlib import Path

from limb.estimators import DEFAULT_DELTA, DEFAULT_R_MAX, trajectory
from limb.schedules import LearningRateSchedule, parse_schedule

POLY = ("poly:0.5", "poly:1", "poly:2", "poly:10")
MIXED = ("poly:0.5", "expunit", "logpoly")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--schedules", default=",".join(POLY + MIXED[1:]))
    ap.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    ap.add_argument("--r-max", type=float, default=DEFAULT_R_MAX)
    ap.add_argument("--n-max", type=float, default=1e8)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--out", default="results/power_profiles")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lr = LearningRateSchedule()
    print(f"{'schedule':>10} {'P(n=1) W':>12} {'E0 last kT':>12} {'monotone':>9} {'infeasible':>10}")
    for spec in args.schedules.split(","):
        ur = parse_schedule(spec)
        points, checks = trajectory(lr, ur, args.delta, args.r_max, args.points, int(args.n_max))
        path = out / f"{spec.replace(':', '_')}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "epsilon", "r", "tilt_kt", "barrier_kt", "power_w"])
            for p in points:
                w.writerow([p.n, p.epsilon_n, p.r_n, p.tilt_kt, p.barrier_kt, p.power_watts])
        print(f"{spec:>10} {points[0].power_watts:12.4e} {points[-1].barrier_kt:12.4f} "
              f"{str(checks['monotone_barrier']):>9} {len(checks['infeasible_steps']):>10}")


if __name__ == "__main__":
    main()
