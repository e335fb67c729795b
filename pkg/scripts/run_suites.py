#!/usr/bin/env python3
"""Run every verification suite at its default size and tolerance; write CSVs and a JSON summary."""
import argparse
import json
import pathlib
import time

from msmstruve import verification as V

SIZES = {"gamma": 1000, "foxwright": 200, "struve": 20, "L1-quadrature": 25, "L2-quadrature": 25, "D1": 200,
         "D2": 200, "T1-termwise": 100, "T2-termwise": 100, "T3-termwise": 100, "T4-termwise": 100,
         "T1-closure": 10}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("reports"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    summaries, bad = [], 0
    for suite in V.SUITES:
        t0 = time.perf_counter()
        rep = V.run_suite(suite, SIZES[suite], seed=args.seed, workers=args.workers)
        dt = time.perf_counter() - t0
        (args.out_dir / f"{suite}.csv").write_text(V.csv_text(rep), encoding="utf-8")
        s = V.summary(rep)
        s["seconds"] = round(dt, 3)
        summaries.append(s)
        bad += rep.structural_failures
        print(f"{suite:14s} {rep.n_pass:5d}/{rep.n_cases:<5d} worst {rep.worst_relative_error:.2e}  {dt:6.2f} s")
        for note in rep.discrepancy_notes:
            print(f"{'':14s} note: {note}")
    (args.out_dir / "summary.json").write_text(json.dumps(summaries, indent=2, sort_keys=True) + "\n",
                                               encoding="utf-8")
    return 3 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
