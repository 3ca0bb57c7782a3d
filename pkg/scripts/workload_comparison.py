#!/usr/bin/env python3
"""Energy estimates for the bundled model records and a brain-scale workload.

For each record: GPU and RRAM-CIM baselines (assumed J/FLOP), CEB,
Landauer + measurement, LIM_A, LIM_B, and the reported energy when
available. A second table compares LIM_B across schedule families.
The brain-scale row also reports A100-hour equivalents of 1e8 J.
"""

import argparse
import csv
from pathlib import Path

from limb import estimators as est
from limb import workloads as wl
from limb.schedules import LearningRateSchedule, parse_schedule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bits", type=float, default=16)
    ap.add_argument("--schedule", default="poly:2")
    ap.add_argument("--out", default="results/workload_comparison.csv")
    args = ap.parse_args()

    records = wl.load_records()
    model = wl.fit_trend(records, slopes=(2.0, 1.0))
    brain_flops = wl.project_flops(model, 1e15)
    print(f"trend projection at 1e15 params: {brain_flops:.3e} FLOPs")
    jobs = [(r.name, r.flops, r.params, r.reported_energy_j) for r in records]
    jobs.append(("brain-scale", 1e28, 1e15, None))

    baselines = wl.load_baselines()
    lr = LearningRateSchedule()
    ur = parse_schedule(args.schedule)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["workload", "name", "method", "total_j", "per_op_kt", "ratio_to_lim_b", "assumption"])
        for name, flops, params, reported in jobs:
            w = est.Workload.from_bits(flops, params, args.bits, label=name)
            rows = wl.compare_workload(w, baselines, lr, ur)
            for r in rows:
                writer.writerow([name, r.name, r.method, r.total_j, r.per_op_kt, r.ratio_to_lim_b, r.assumption])
            if reported:
                writer.writerow([name, "reported", "REPORTED", reported, "", "", False])
            by = {r.name: r.total_j for r in rows}
            print(f"{name:>14} gpu {by['gpu']:10.3e}  ceb {by['ceb']:10.3e}  lim_a {by['lim_a_num']:10.3e}  "
                  f"lim_b {by['lim_b_num']:10.3e}" + (f"  reported {reported:10.3e}" if reported else ""))
    print(f"wrote {out}")

    print("\nLIM_B brain-scale energy by schedule")
    w = est.Workload.from_bits(1e28, 1e15, args.bits)
    for spec in ("poly:0.5", "poly:2", "poly:10", "expunit", "logpoly"):
        e = est.lim_b_numeric(w, lr, parse_schedule(spec))
        print(f"{spec:>10} {e.total_joules:10.4e} J  ({e.dynamic_kt_per_op:.4f} kT/op)")

    for watts in (250.0, 400.0):
        print(f"1e8 J at {watts:.0f} W = {wl.gpu_hours_equivalent(1e8, watts):.1f} GPU-hours")


if __name__ == "__main__":
    main()
