#!/usr/bin/env python3
"""Survey dimension maximizers on the continued-fraction system.

Runs the support sweep L = 1..L_max, prints a table of certified
dimension brackets with the optimal weight vectors, and reports how the
per-L decay constants behave.  Optionally writes a gnuplot-ready file
with midpoints and half-widths.
"""

import argparse
import sys

from branchdim.optimize import records_to_csv, sweep_L
from branchdim.systems import build_catalog


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L-max", type=int, default=6)
    ap.add_argument("--alpha", type=float, default=0.75,
                    help="decay exponent for the constant C in p_i <= C / tau_i^alpha")
    ap.add_argument("--plot", metavar="FILE", default=None,
                    help="write L / midpoint / half-width columns here")
    ap.add_argument("--csv", metavar="FILE", default=None)
    args = ap.parse_args(argv)

    system = build_catalog("gauss")
    report = sweep_L(system, args.L_max, alpha=args.alpha)

    print(f"{'L':>3} {'depth':>5} {'dim bracket':>32} {'width':>10} {'C':>8}  p")
    for rec, c in zip(report, report.decay_constants):
        w = " ".join(f"{x:.6f}" for x in rec.p_opt.weights)
        print(f"{rec.L:>3} {rec.depth:>5} "
              f"[{rec.dim.lo:.12f}, {rec.dim.hi:.12f}] "
              f"{rec.dim.width:>10.3e} {c:>8.4f}  ({w})")

    consts = report.decay_constants[1:]
    if consts:
        spread = max(consts) / min(consts)
        print(f"\ndecay constants (alpha={report.alpha}): "
              f"min {min(consts):.4f}, max {max(consts):.4f}, ratio {spread:.3f}")

    for i, seq in sorted(report.p_trend.items()):
        print(f"weight of symbol {i} along the sweep: "
              + " ".join(f"{x:.5f}" for x in seq))

    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write("# L dimension_midpoint half_width\n")
            for rec in report:
                fh.write(f"{rec.L} {rec.dim.midpoint!r} {rec.dim.width / 2!r}\n")
        print(f"\nwrote {args.plot}")

    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(records_to_csv(list(report)))
        print(f"wrote {args.csv}")

    return 0


if __name__ == "__main__":
    sys.exit(main())
