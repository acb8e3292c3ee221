"""Certified value brackets and directed-rounding accumulation helpers.

A ValueBracket is a closed interval [lo, hi] guaranteed to contain the exact
value of a cylinder-sum quantity, together with the cylinder depth that
produced it.  Certification is cheap rather than exhaustive: sums are taken
with math.fsum (correctly rounded) and then widened by a slack proportional to
the accumulated relative error of the factors that built each term, plus a
one-ulp outward nudge.  Full interval arithmetic is deliberately avoided; the
slack is orders of magnitude below the bracket widths the cylinder geometry
itself produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative-error multiplier per accumulation stage, in units of machine eps.
# Covers: per-level mass products (depth multiplications), the elementwise
# multiply against the extreme values, log evaluation of the extremes, and the
# fsum rounding itself.
_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class ValueBracket:
    """Closed interval certified to contain a value, tagged with its depth."""

    lo: float
    hi: float
    depth: int

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"bracket lo {self.lo} exceeds hi {self.hi}")
        if self.depth < 1:
            raise ValueError("bracket depth must be a positive integer")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def intersects(self, other: "ValueBracket") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def down(x: float) -> float:
    """Next float toward -inf."""
    return math.nextafter(x, -math.inf)


def up(x: float) -> float:
    """Next float toward +inf."""
    return math.nextafter(x, math.inf)


def certified_sum(terms: np.ndarray, stages: int, extra_abs: float = 0.0) -> tuple[float, float]:
    """Bracket Sum(terms) given each term carries `stages` rounded factors.

    Returns (lo, hi) around the fsum of `terms`, widened by
    stages * eps * Sum|terms| + extra_abs and nudged one ulp outward.
    `extra_abs` absorbs absolute uncertainty that is not relative to the term
    magnitudes (root-solved endpoint residuals).
    """
    t = np.asarray(terms, dtype=np.float64)
    s = math.fsum(t.tolist())
    slack = stages * _EPS * math.fsum(np.abs(t).tolist()) + extra_abs
    return down(s - slack), up(s + slack)


def scale_bracket(lo: float, hi: float, factor: float) -> tuple[float, float]:
    """Directed-rounded (lo, hi) * factor for factor > 0."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return down(lo * factor), up(hi * factor)


def divide_into(numerator: float, lo: float, hi: float) -> tuple[float, float]:
    """Directed-rounded [numerator/hi, numerator/lo] for 0 < lo <= hi, numerator >= 0."""
    if lo <= 0:
        raise ValueError("division requires a positive lower bound")
    return down(numerator / hi), up(numerator / lo)
