#!/usr/bin/env python3
"""LIM_A vs LIM_B brain-scale energy as a function of the decay parameter gamma.

Polynomial schedules n^-(1+gamma) use the numerical estimators, with the
closed form for LIM_A alongside as a cross-check. Exponential schedules
use both the closed forms and the numerical sums.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from limb import estimators as est
from limb.schedules import LearningRateSchedule, UpdateRateSchedule


def sweep(family, gammas, w, lr):
    rows = []
    for g in gammas:
        ur = UpdateRateSchedule(family, float(g))
        a = est.lim_a_numeric(w, lr, ur)
        b = est.lim_b_numeric(w, lr, ur)
        if family == "polynomial":
            a_ref = est.lim_a_closed_poly(w, g)
            b_ref = est.lim_b_lower_closed(w, g)
        else:
            a_ref = est.lim_a_exp_closed(w, g)
            b_ref = est.lim_b_exp_closed(w, g)
        rows.append((family, g, a.total_joules, a_ref.total_joules, b.total_joules, b_ref.total_joules))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--flops", type=float, default=1e28)
    ap.add_argument("--params", type=float, default=1e15)
    ap.add_argument("--bits", type=float, default=16)
    ap.add_argument("--out", default="results/gamma_tradeoff.csv")
    args = ap.parse_args()

    w = est.Workload.from_bits(args.flops, args.params, args.bits)
    lr = LearningRateSchedule()
    gammas = np.geomspace(0.01, 30, 25)
    rows = sweep("polynomial", gammas, w, lr) + sweep("exponential", gammas, w, lr)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "gamma", "lim_a_j", "lim_a_ref_j", "lim_b_j", "lim_b_ref_j"])
        writer.writerows(rows)

    # the ref column for polynomial LIM_B is the closed-form lower bound
    print(f"{'family':>12} {'gamma':>8} {'LIM_A J':>11} {'ref':>11} {'LIM_B J':>11} {'ref':>11}")
    for r in rows[::3]:
        print(f"{r[0]:>12} {r[1]:8.3g} {r[2]:11.4e} {r[3]:11.4e} {r[4]:11.4e} {r[5]:11.4e}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
