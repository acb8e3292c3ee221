#!/usr/bin/env python3
"""Demonstrate the two ways a pushforward can fail to be self-similar.

Part 1: on the tangent-family system, two periodic words with the same
symbol multiset have different cycle derivatives.  The certified gap rules
out any smooth conjugacy to a piecewise-affine model.

Part 2: on the continued-fraction system, the invariant measure of
cylinder (1,2) deviates from the product of its one-symbol masses, so that
measure is not a Bernoulli pushforward in the natural coordinates.
"""

import argparse
import math
import sys

from branchdim.gapcert import (
    bernoulli_factorization_test,
    certificate_search,
    certificate_to_text,
    gauss_cylinder_measure,
)
from branchdim.systems import build_catalog


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-symbol", type=int, default=3)
    ap.add_argument("--max-len", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args(argv)

    system = build_catalog("example_tangent")
    cert = certificate_search(system, args.max_symbol, args.max_len, args.tol)
    print("== tangent family: cycle-derivative gap ==")
    print(certificate_to_text(cert))
    if cert is not None:
        a, b = cert.orbit_a, cert.orbit_b
        print(f"\nword {a.word}: point {a.point:.12f}, "
              f"cycle derivative {math.exp(a.cycle_log_derivative):.6f}")
        print(f"word {b.word}: point {b.point:.12f}, "
              f"cycle derivative {math.exp(b.cycle_log_derivative):.6f}")

    print("\n== continued fractions: factorization deviation ==")
    report = bernoulli_factorization_test(gauss_cylinder_measure,
                                          [(1, 2), (1, 3), (2, 3)], 1e-5)
    for e in report.entries:
        flag = "violates product rule" if e.witness else "within tolerance"
        print(f"cylinder {e.pair}: mass {e.joint:.12f}, "
              f"product {e.product:.12f}, deviation {e.deviation:.6e} ({flag})")
        print(f"  reversed cylinder mass {e.reversed_joint:.12f} "
              f"(gap {e.reversal_gap:.3e})")
    verdict = "consistent with" if report.bernoulli_consistent else "not"
    print(f"measure is {verdict} a Bernoulli pushforward at this tolerance")
    return 0


if __name__ == "__main__":
    sys.exit(main())
