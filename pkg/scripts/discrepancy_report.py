#!/usr/bin/env python3
"""Print every difference between the stored printed displays and the compiled theorem images."""
import argparse

from msmstruve.fixtures import discrepancy_report
from msmstruve.image_formulas import THEOREMS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("theorems", nargs="*", choices=THEOREMS, default=list(THEOREMS))
    args = ap.parse_args()
    report = discrepancy_report(tuple(args.theorems))
    for m in report:
        print(m)
    print(f"{len(report)} mismatch(es)")


if __name__ == "__main__":
    main()
