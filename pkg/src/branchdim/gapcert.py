"""Numerical dimension-gap certificates from periodic cycle derivatives.

If every Bernoulli pushforward had dimension 1, the log branch derivative
would be cohomologous to a function of cylinder masses, forcing every pair of
periodic orbits visiting the same branches (in any order) to share the same
cycle derivative.  A witnessed violation — two itineraries over one symbol
multiset whose cycle derivatives differ by more than the propagated numerical
error — therefore certifies a dimension gap at 1.

Periodic points are located by iterating the composed inverse branches, a
contraction by the expanding-iterate condition.  The module also carries the
invariant-density cylinder measure of the continued-fraction system in exact
rational arithmetic, and a factorization test showing that measure is not
itself a Bernoulli pushforward.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetError, ConfigError, NonContractionError
from .systems import (
    BranchedSystem,
    _check_word,
    build_catalog,
    cylinder_fractions,
    cylinder_interval,
)

__all__ = [
    "PeriodicOrbit",
    "GapCertificate",
    "periodic_point",
    "forward_orbit",
    "certificate_search",
    "gauss_cylinder_measure",
    "FactorizationEntry",
    "FactorizationReport",
    "bernoulli_factorization_test",
    "certificate_to_json",
    "certificate_to_text",
]

_RESIDUAL_CAP = 1e-9
_FIXED_POINT_TOL = 1e-13
_MAX_ROUNDS = 200


@dataclass(frozen=True)
class PeriodicOrbit:
    """Periodic point with itinerary word: the i-th iterate lies in branch
    domain word[i] (0-based iterate, 1-based branch labels)."""

    word: tuple
    point: float
    cycle_log_derivative: float
    residual: float

    def __post_init__(self):
        if self.residual > _RESIDUAL_CAP:
            raise ConfigError(
                f"orbit residual {self.residual:.3g} exceeds {_RESIDUAL_CAP}"
            )

    @property
    def period(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class GapCertificate:
    orbit_a: PeriodicOrbit
    orbit_b: PeriodicOrbit
    derivative_gap: float
    error_bound: float
    valid: bool

    def __post_init__(self):
        if sorted(self.orbit_a.word) != sorted(self.orbit_b.word):
            raise ConfigError("certificate orbits must share a symbol multiset")
        if self.valid != (self.derivative_gap > self.error_bound):
            raise ConfigError("validity flag contradicts gap vs error bound")


def forward_orbit(system: BranchedSystem, word: tuple, x0: float) -> list:
    """Points x0, T(x0), ..., T^n(x0) following the word's branches."""
    xs = [float(x0)]
    for a in word:
        xs.append(float(system.branch(a).forward(xs[-1])))
    return xs


def periodic_point(system: BranchedSystem, word) -> PeriodicOrbit:
    """Locate the periodic point whose itinerary is the given word.

    Iterates the inverse-branch composition phi_{a1} o ... o phi_{an} from
    the cylinder midpoint; the expanding iterate makes this a contraction, so
    successive iterates converge geometrically.  Divergent iterates mean the
    system lacks its expanding iterate on this cycle and raise
    NonContractionError.  The cycle log-derivative is assembled along the
    forward orbit by the chain rule.
    """
    word = _check_word(system, word)
    branches = [system.branch(a) for a in word]
    try:
        x = cylinder_interval(system, word).midpoint
    except ConfigError:
        # non-expanding branches can push inverse images outside (0,1);
        # start from the leading branch and let the divergence check decide
        x = branches[0].domain.midpoint
    prev_diff = math.inf
    growth = 0
    for _ in range(_MAX_ROUNDS):
        y = x
        for b in reversed(branches):
            y = float(b.inverse(y))
        diff = abs(y - x)
        x = y
        if diff < _FIXED_POINT_TOL:
            break
        if diff > prev_diff and diff > 1e-10:
            growth += 1
            if growth >= 5 or not 0.0 <= x <= 1.0:
                raise NonContractionError(
                    f"inverse iterates for word {word} diverge (last step "
                    f"{diff:.3g}); the expanding-iterate condition fails here"
                )
        else:
            growth = 0
        prev_diff = diff
    else:
        raise NonContractionError(
            f"inverse iterates for word {word} did not contract to "
            f"{_FIXED_POINT_TOL} within {_MAX_ROUNDS} rounds"
        )

    xs = forward_orbit(system, word, x)
    cld = math.fsum(
        math.log(abs(float(b.derivative(xi)))) for b, xi in zip(branches, xs)
    )
    residual = abs(xs[-1] - xs[0])
    return PeriodicOrbit(word, x, cld, residual)


def _log_deriv_lipschitz(system: BranchedSystem, orbit: PeriodicOrbit) -> float:
    """Bound |d cld / d point| along the cycle.

    Each term log|T'| has slope T''/T' at the visited point, amplified by the
    derivative of the iterate reaching it.  Affine branches contribute zero.
    """
    xs = forward_orbit(system, orbit.word, orbit.point)
    amplify = 1.0
    total = 0.0
    for a, xi in zip(orbit.word, xs):
        b = system.branch(a)
        d = abs(float(b.derivative(xi)))
        if b.second_derivative is not None:
            total += abs(float(b.second_derivative(xi))) / d * amplify
        amplify *= d
    return total


def _orbit_error(system: BranchedSystem, orbit: PeriodicOrbit) -> float:
    eps = math.ulp(1.0)
    rounding = orbit.period * eps * abs(orbit.cycle_log_derivative)
    drift = _log_deriv_lipschitz(system, orbit) * max(orbit.residual,
                                                      _FIXED_POINT_TOL)
    return 10.0 * (rounding + drift)


def _lyndon_words(max_symbol: int, max_len: int):
    """Aperiodic necklace representatives: one word per rotation class,
    pure powers of shorter words excluded."""
    for n in range(1, max_len + 1):
        def gen(prefix):
            if len(prefix) == n:
                rots = [prefix[i:] + prefix[:i] for i in range(1, n)]
                if all(prefix < r for r in rots):
                    yield tuple(prefix)
                return
            for a in range(1, max_symbol + 1):
                yield from gen(prefix + [a])
        yield from gen([])


def certificate_search(system: BranchedSystem, max_symbol: int, max_len: int,
                       tol: float = 1e-9, *,
                       budget: int = 10**6):
    """Best certified cycle-derivative violation, or None.

    Enumerates itineraries up to rotation (rotations share cycle derivatives
    exactly), groups them by symbol multiset, and compares log cycle
    derivatives within each group; the log-space gap is the relative gap of
    the derivatives themselves.  The winning pair must clear both the
    requested tolerance and the propagated error bound; ties break to
    lexicographically smallest words.
    """
    if max_symbol < 1 or max_symbol > system.n_branches:
        raise ConfigError(
            f"symbol bound must lie in 1..{system.n_branches}"
        )
    if max_len < 1:
        raise ConfigError("word length bound must be positive")
    if max_symbol**max_len > budget:
        raise BudgetError(
            f"{max_symbol}^{max_len} itineraries exceed the budget {budget}"
        )

    groups = {}
    for w in _lyndon_words(max_symbol, max_len):
        groups.setdefault(tuple(sorted(w)), []).append(w)

    best = None  # (gap, word_a, word_b, orbit_a, orbit_b, err)
    orbits = {}
    for key, words in sorted(groups.items()):
        if len(words) < 2:
            continue
        for w in words:
            if w not in orbits:
                orbits[w] = periodic_point(system, w)
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                oa, ob = orbits[words[i]], orbits[words[j]]
                gap = abs(oa.cycle_log_derivative - ob.cycle_log_derivative)
                err = _orbit_error(system, oa) + _orbit_error(system, ob)
                if gap <= tol or gap <= err:
                    continue
                cand = (gap, words[i], words[j], oa, ob, err)
                if best is None or gap > best[0] or (
                    gap == best[0] and (words[i], words[j]) < (best[1], best[2])
                ):
                    best = cand
    if best is None:
        return None
    gap, _, _, oa, ob, err = best
    return GapCertificate(oa, ob, gap, err, gap > err)


# ---------------------------------------------------------------------------
# Invariant-measure cylinder arithmetic for the continued-fraction system

_LOG2 = math.log(2.0)


def _gauss_system() -> BranchedSystem:
    sys = getattr(_gauss_system, "_cache", None)
    if sys is None:
        sys = build_catalog("gauss")
        _gauss_system._cache = sys
    return sys


def gauss_cylinder_measure(word) -> float:
    """Mass of the word's cylinder under the density 1/((1+x) log 2).

    The antiderivative is exact: log((1+hi)/(1+lo))/log 2, with the cylinder
    endpoints in rational arithmetic for words up to length 12.
    """
    system = _gauss_system()
    word = _check_word(system, word)
    fr = cylinder_fractions(system, word)
    if fr is not None:
        lo, hi = fr
        num = (1 + hi).numerator * (1 + lo).denominator
        den = (1 + hi).denominator * (1 + lo).numerator
        return math.log(num / den) / _LOG2
    cyl = cylinder_interval(system, word)
    return math.log((1.0 + cyl.hi) / (1.0 + cyl.lo)) / _LOG2


@dataclass(frozen=True)
class FactorizationEntry:
    pair: tuple
    joint: float          # mu of the two-symbol cylinder (a, b)
    product: float        # mu(a) * mu(b)
    deviation: float
    witness: bool         # deviation exceeds tolerance
    reversed_joint: float  # mu of (b, a), for reference
    reversal_gap: float


@dataclass(frozen=True)
class FactorizationReport:
    entries: tuple
    tol: float

    @property
    def witnesses(self) -> tuple:
        return tuple(e for e in self.entries if e.witness)

    @property
    def bernoulli_consistent(self) -> bool:
        return not self.witnesses


def bernoulli_factorization_test(measure, pairs, tol: float) -> FactorizationReport:
    """Test whether a cylinder-measure evaluator factorizes like a Bernoulli.

    A Bernoulli pushforward gives mu([a, b]) = mu([a]) mu([b]) for every
    symbol pair; any deviation beyond tol on some pair disproves Bernoulli
    origin, with that pair as witness.  Each entry also records the
    order-swapped cylinder mass for reference.
    """
    if tol < 0:
        raise ConfigError("tolerance must be nonnegative")
    entries = []
    for a, b in pairs:
        joint = measure((a, b))
        product = measure((a,)) * measure((b,))
        dev = abs(joint - product)
        rev = measure((b, a))
        entries.append(FactorizationEntry(
            pair=(a, b), joint=joint, product=product, deviation=dev,
            witness=dev > tol, reversed_joint=rev,
            reversal_gap=abs(joint - rev),
        ))
    return FactorizationReport(tuple(entries), tol)


# ---------------------------------------------------------------------------
# Rendering


def _orbit_dict(o: PeriodicOrbit) -> dict:
    return {
        "word": list(o.word),
        "point": o.point,
        "cycle_log_derivative": o.cycle_log_derivative,
        "cycle_derivative": math.exp(o.cycle_log_derivative),
        "residual": o.residual,
    }


def certificate_to_json(cert) -> str:
    if cert is None:
        return json.dumps({"found": False, "valid": False})
    return json.dumps({
        "found": True,
        "orbit_a": _orbit_dict(cert.orbit_a),
        "orbit_b": _orbit_dict(cert.orbit_b),
        "gap": cert.derivative_gap,
        "error_bound": cert.error_bound,
        "valid": cert.valid,
    }, indent=2)


def certificate_to_text(cert) -> str:
    if cert is None:
        return ("no certificate found: all comparable cycles share their "
                "derivatives at this length (inconclusive, not a proof of "
                "absence)")
    a, b = cert.orbit_a, cert.orbit_b
    lines = [
        "dimension-gap certificate",
        f"  itinerary A {a.word}: point {a.point:.12g}, "
        f"cycle derivative {math.exp(a.cycle_log_derivative):.6f}",
        f"  itinerary B {b.word}: point {b.point:.12g}, "
        f"cycle derivative {math.exp(b.cycle_log_derivative):.6f}",
        f"  relative gap {cert.derivative_gap:.6g} vs error bound "
        f"{cert.error_bound:.3g}",
        f"  valid: {cert.valid}",
    ]
    return "\n".join(lines)
