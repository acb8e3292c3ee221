"""Countable branched interval maps: catalog systems, cylinders, and checks.

A branched system is a map T on (0,1) assembled from monotone expanding-family
branches T_n: I_n -> (0,1) over a partition of (0,1).  Countable families are
held as an explicit finite prefix of lazily built branches plus a power-law
tail descriptor for |I_n| and tau_n asymptotics; everything the computations
touch lives in the prefix, the descriptor only feeds tail bounds.

Conventions used throughout:
  - branch indices are 1-based (branches[1] is the first branch);
  - branch evaluators (forward, derivative, inverse) accept scalars or numpy
    arrays and extend continuously to domain closures, so endpoint evaluation
    stands in for one-sided limits;
  - `derivative` is signed; callers take abs() where magnitude is meant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .brackets import ValueBracket
from .errors import (
    BudgetError,
    ConfigError,
    DivergenceError,
    InconclusiveError,
)

__all__ = [
    "Interval",
    "Branch",
    "TailDescriptor",
    "BranchedSystem",
    "CATALOG",
    "build_catalog",
    "cylinder_interval",
    "cylinder_fractions",
    "tau",
    "sup_deriv",
    "k_t",
    "s0_estimate",
    "validate",
    "ConditionCheck",
    "ValidationReport",
    "bisect_newton",
    "invert_monotone",
]


@dataclass(frozen=True)
class Interval:
    """Open subinterval of [0,1]; also used for closed certified enclosures."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ConfigError(f"invalid interval ({self.lo}, {self.hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol


@dataclass(frozen=True)
class Branch:
    """One monotone branch T_n: I_n -> (0,1) with evaluators and metadata.

    Exact-arithmetic hooks (domain_fractions, rational_inverse,
    rational_deriv_abs) are present when the branch maps are rational functions
    with rational coefficients; they remove endpoint roundoff from cylinder and
    measure computations.  inverse_residual is the certified residual of a
    root-solved inverse (0 for closed forms).
    """

    index: int
    domain: Interval
    forward: Callable
    derivative: Callable
    inverse: Callable
    orientation: str  # 'preserving' | 'reversing'
    derivative_monotone: str  # 'increasing' | 'decreasing' (weak)
    second_derivative: Optional[Callable] = None
    domain_fractions: Optional[tuple] = None
    rational_inverse: Optional[Callable] = None
    rational_deriv_abs: Optional[Callable] = None
    inverse_residual: float = 0.0


@dataclass(frozen=True)
class TailDescriptor:
    """Power-law asymptotics for the un-enumerated branch tail.

    Guarantees, for n > valid_from:
      |I_n| <= length_coeff * n**(-length_power)
      tau_n >= tau_coeff * n**tau_power
    """

    length_coeff: float
    length_power: float
    tau_coeff: float
    tau_power: float
    valid_from: int = 1


class BranchSeq:
    """1-based lazy view over a system's explicit branch prefix."""

    def __init__(self, system: "BranchedSystem"):
        self._system = system

    def __getitem__(self, n: int) -> Branch:
        return self._system.branch(n)

    def __len__(self) -> int:
        return self._system.n_branches

    def __iter__(self):
        for n in range(1, self._system.n_branches + 1):
            yield self._system.branch(n)


@dataclass
class BranchedSystem:
    """Finite prefix of a branched family plus tail metadata.

    `rule` builds branch n on demand; `domain_rule`, when present, returns the
    (lo, hi) domain endpoints for a whole index array without instantiating
    Branch objects (used by partition checks, s0 fits, and tail-heavy sums).
    `memo` is a scratch cache other modules key with their own tuples
    (cylinder tables and the like); it never changes observable behavior.
    """

    name: str
    orientation: str
    expansion_iterate: int
    expansion_factor: float
    n_branches: int
    rule: Callable[[int], Branch]
    finite: bool
    tail: Optional[TailDescriptor] = None
    domain_rule: Optional[Callable] = None
    memo: dict = field(default_factory=dict, repr=False, compare=False)
    _branch_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def branch(self, n: int) -> Branch:
        if not (isinstance(n, (int, np.integer)) and 1 <= n <= self.n_branches):
            raise ConfigError(
                f"branch index {n!r} outside explicit range 1..{self.n_branches}"
            )
        b = self._branch_cache.get(n)
        if b is None:
            b = self.rule(int(n))
            self._branch_cache[n] = b
        return b

    @property
    def branches(self) -> BranchSeq:
        return BranchSeq(self)

    def tau_lower(self, n: int) -> float:
        """Cheap lower bound on tau_n valid beyond the explicit prefix."""
        if n <= self.n_branches:
            return tau(self, n)
        if self.tail is None:
            raise ConfigError(f"branch {n} beyond finite family of {self.n_branches}")
        return self.tail.tau_coeff * float(n) ** self.tail.tau_power


# ---------------------------------------------------------------------------
# Root solving


def bisect_newton(f, fprime, lo: float, hi: float, *, tol: float = 1e-12,
                  max_iter: int = 200) -> float:
    """Safeguarded root of f on [lo, hi] (f(lo), f(hi) of opposite sign).

    Bisection narrows the bracket; Newton steps are taken whenever they stay
    inside it.  Converges to |f| <= tol or a bracket of width ~1 ulp.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ConfigError(f"root not bracketed on [{lo}, {hi}]")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = f(x)
        if abs(fx) <= tol:
            return x
        if flo * fx < 0:
            hi = x
        else:
            lo, flo = x, fx
        d = fprime(x)
        step = x - fx / d if d != 0 else math.nan
        if lo < step < hi:
            x = step
        else:
            x = 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(x):
            return x
    return x


def invert_monotone(forward, derivative, lo: float, hi: float, y,
                    *, newton_steps: int = 2):
    """Vectorized inverse of an increasing map on [lo, hi] at values y in [0,1].

    64 bisection rounds bring every component to ~2^-64 of the domain width;
    Newton polishing then gets residuals |forward(x) - y| down to ~1e-15 for
    the well-conditioned branches this package builds (derivative >= 2).
    """
    y = np.asarray(y, dtype=np.float64)
    a = np.full(y.shape, lo)
    b = np.full(y.shape, hi)
    for _ in range(64):
        m = 0.5 * (a + b)
        left = forward(m) < y
        a = np.where(left, m, a)
        b = np.where(left, b, m)
    x = 0.5 * (a + b)
    for _ in range(newton_steps):
        x = x - (forward(x) - y) / derivative(x)
        x = np.clip(x, lo, hi)
    return x


# ---------------------------------------------------------------------------
# Catalog

CATALOG = ("gauss", "luroth", "affine", "example_tangent")

_DEFAULT_PREFIX = 10_000


def _const_fn(value: float) -> Callable:
    # affine branches have constant derivative; keep the array shape of x
    return lambda x, v=float(value): np.full_like(np.asarray(x, dtype=np.float64), v)


def _gauss_branch(n: int) -> Branch:
    lo, hi = 1.0 / (n + 1), 1.0 / n
    return Branch(
        index=n,
        domain=Interval(lo, hi),
        forward=lambda x, n=n: 1.0 / x - n,
        derivative=lambda x: -1.0 / (x * x),
        inverse=lambda y, n=n: 1.0 / (n + y),
        orientation="reversing",
        derivative_monotone="increasing",
        second_derivative=lambda x: 2.0 / x**3,
        domain_fractions=(Fraction(1, n + 1), Fraction(1, n)),
        rational_inverse=lambda y, n=n: Fraction(1, 1) / (n + y),
        rational_deriv_abs=lambda x: 1 / (x * x),
    )


def _luroth_branch(n: int) -> Branch:
    lo, hi = 1.0 / (n + 1), 1.0 / n
    slope = n * (n + 1)
    return Branch(
        index=n,
        domain=Interval(lo, hi),
        forward=lambda x, s=slope, n=n: s * x - n,
        derivative=_const_fn(slope),
        inverse=lambda y, s=slope, n=n: (y + n) / s,
        orientation="preserving",
        derivative_monotone="increasing",
        second_derivative=None,
        domain_fractions=(Fraction(1, n + 1), Fraction(1, n)),
        rational_inverse=lambda y, s=slope, n=n: (y + n) / Fraction(s),
        rational_deriv_abs=lambda x, s=slope: Fraction(s),
    )


def _interval_domains(n_array):
    n = np.asarray(n_array, dtype=np.float64)
    return 1.0 / (n + 1.0), 1.0 / n


def _affine_branch(index: int, lo: Fraction, hi: Fraction) -> Branch:
    width = hi - lo
    slope = 1 / width
    flo, fw = float(lo), float(width)
    return Branch(
        index=index,
        domain=Interval(flo, float(hi)),
        forward=lambda x, a=flo, w=fw: (x - a) / w,
        derivative=_const_fn(float(slope)),
        inverse=lambda y, a=flo, w=fw: a + y * w,
        orientation="preserving",
        derivative_monotone="increasing",
        second_derivative=None,
        domain_fractions=(lo, hi),
        rational_inverse=lambda y, a=lo, w=width: a + y * w,
        rational_deriv_abs=lambda x, s=slope: s,
    )


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**12)


def _build_affine(lengths) -> BranchedSystem:
    if not lengths:
        raise ConfigError("affine family needs at least one length")
    fr = [_as_fraction(l) for l in lengths]
    if any(l <= 0 or l >= 1 for l in fr):
        raise ConfigError("affine lengths must lie in (0, 1)")
    total = sum(fr)
    if total > 1:
        raise ConfigError(f"affine lengths sum to {float(total)} > 1")
    cuts = [Fraction(0)]
    for l in fr:
        cuts.append(cuts[-1] + l)
    branches = [
        _affine_branch(i + 1, cuts[i], cuts[i + 1]) for i in range(len(fr))
    ]
    max_len = max(float(l) for l in fr)
    return BranchedSystem(
        name="affine",
        orientation="preserving",
        expansion_iterate=1,
        expansion_factor=1.0 / max_len,
        n_branches=len(branches),
        rule=lambda n, bs=branches: bs[n - 1],
        finite=True,
        tail=None,
    )


# Right endpoint of the tangent branch domain: solves 8b + tan(b - 3/4) = 7,
# making T_3 surjective onto (0,1).
def _tangent_b() -> float:
    g = lambda x: 8.0 * x + math.tan(x - 0.75) - 7.0
    gp = lambda x: 8.0 + 1.0 / math.cos(x - 0.75) ** 2
    return bisect_newton(g, gp, 0.75 + 1e-9, 0.9, tol=1e-14)


def _build_example_tangent(tail_branches: int = 4) -> BranchedSystem:
    """Three-branch example with one non-affine branch, plus an affine tail.

    Branches: (0,1/2) with 2x; (1/2,3/4) with 4x-2; (3/4,b) with
    8x + tan(x-3/4) - 6 where b solves 8b + tan(b-3/4) = 7.  The leftover
    (b,1) is tiled by `tail_branches` affine branches with lengths in
    proportion 1/2, 1/4, ..., the last proportion repeated so the pieces tile
    exactly.
    """
    if tail_branches < 1:
        raise ConfigError("example_tangent needs at least one tail branch")
    b = _tangent_b()

    def fwd3(x):
        return 8.0 * x + np.tan(x - 0.75) - 6.0

    def der3(x):
        return 8.0 + 1.0 / np.cos(x - 0.75) ** 2

    def sec2tan(x):
        c = np.cos(x - 0.75)
        return 2.0 * np.tan(x - 0.75) / (c * c)

    def inv3(y):
        return invert_monotone(fwd3, der3, 0.75, b, y)

    branch12 = [
        _affine_branch(1, Fraction(0), Fraction(1, 2)),
        _affine_branch(2, Fraction(1, 2), Fraction(3, 4)),
    ]
    branch3 = Branch(
        index=3,
        domain=Interval(0.75, b),
        forward=fwd3,
        derivative=der3,
        inverse=inv3,
        orientation="preserving",
        derivative_monotone="increasing",
        second_derivative=sec2tan,
        inverse_residual=1e-12,
    )
    # Affine tail tiling (b, 1): proportions 1/2, 1/4, ..., last repeated.
    props = [Fraction(1, 2**i) for i in range(1, tail_branches)]
    props.append(props[-1] if props else Fraction(1))
    rem = 1.0 - b
    cuts = [b]
    for q in props:
        cuts.append(cuts[-1] + rem * float(q))
    cuts[-1] = 1.0
    tail = []
    for i in range(tail_branches):
        lo_f, hi_f = cuts[i], cuts[i + 1]
        w = hi_f - lo_f
        tail.append(
            Branch(
                index=4 + i,
                domain=Interval(lo_f, hi_f),
                forward=lambda x, a=lo_f, w=w: (x - a) / w,
                derivative=_const_fn(1.0 / w),
                inverse=lambda y, a=lo_f, w=w: a + y * w,
                orientation="preserving",
                derivative_monotone="increasing",
            )
        )
    allb = branch12 + [branch3] + tail
    return BranchedSystem(
        name="example_tangent",
        orientation="preserving",
        expansion_iterate=1,
        expansion_factor=2.0,
        n_branches=len(allb),
        rule=lambda n, bs=allb: bs[n - 1],
        finite=True,
        tail=None,
    )


def build_catalog(name: str, **params) -> BranchedSystem:
    """Build a named system.

    gauss / luroth accept `branches` (explicit prefix size, default 10000);
    affine requires `lengths` (sequence in (0,1), sum <= 1); example_tangent
    accepts `tail_branches` (default 4).
    """
    if name == "gauss":
        nb = int(params.pop("branches", _DEFAULT_PREFIX))
        if params:
            raise ConfigError(f"unknown gauss params {sorted(params)}")
        if nb < 1:
            raise ConfigError("branches must be positive")
        return BranchedSystem(
            name="gauss",
            orientation="reversing",
            expansion_iterate=2,
            expansion_factor=4.0,
            n_branches=nb,
            rule=_gauss_branch,
            finite=False,
            tail=TailDescriptor(1.0, 2.0, 1.0, 2.0),
            domain_rule=_interval_domains,
        )
    if name == "luroth":
        nb = int(params.pop("branches", _DEFAULT_PREFIX))
        if params:
            raise ConfigError(f"unknown luroth params {sorted(params)}")
        if nb < 1:
            raise ConfigError("branches must be positive")
        return BranchedSystem(
            name="luroth",
            orientation="preserving",
            expansion_iterate=1,
            expansion_factor=2.0,
            n_branches=nb,
            rule=_luroth_branch,
            finite=False,
            tail=TailDescriptor(1.0, 2.0, 1.0, 2.0),
            domain_rule=_interval_domains,
        )
    if name == "affine":
        lengths = params.pop("lengths", None)
        if params:
            raise ConfigError(f"unknown affine params {sorted(params)}")
        if lengths is None:
            raise ConfigError("affine family requires lengths=[...]")
        return _build_affine(lengths)
    if name == "example_tangent":
        tb = int(params.pop("tail_branches", 4))
        if params:
            raise ConfigError(f"unknown example_tangent params {sorted(params)}")
        return _build_example_tangent(tb)
    raise ConfigError(f"unknown system {name!r}; catalog: {', '.join(CATALOG)}")


# ---------------------------------------------------------------------------
# Cylinders

_EXACT_WORD_LEN = 12


def _check_word(system: BranchedSystem, word) -> tuple:
    w = tuple(int(a) for a in word)
    if not w:
        raise ConfigError("empty word")
    for a in w:
        if not 1 <= a <= system.n_branches:
            raise ConfigError(
                f"symbol {a} outside explicit branch range 1..{system.n_branches}"
            )
    return w


def cylinder_fractions(system: BranchedSystem, word) -> Optional[tuple]:
    """Exact rational cylinder endpoints, or None when unavailable.

    Available when every branch in the word has a rational inverse and the
    word length is at most 12 (denominators stay tame there).
    """
    w = _check_word(system, word)
    if len(w) > _EXACT_WORD_LEN:
        return None
    branches = [system.branch(a) for a in w]
    if any(b.rational_inverse is None for b in branches):
        return None
    lo, hi = Fraction(0), Fraction(1)
    for b in reversed(branches):
        lo, hi = b.rational_inverse(lo), b.rational_inverse(hi)
        if lo > hi:
            lo, hi = hi, lo
    return lo, hi


def cylinder_interval(system: BranchedSystem, word) -> Interval:
    """The open interval of points whose first digits spell `word`.

    Composes inverse branches right-to-left; endpoints are exact rationals for
    rational-inverse branches at word length <= 12, floating otherwise (with
    root-solved inverses certified to residual 1e-12).
    """
    w = _check_word(system, word)
    exact = cylinder_fractions(system, w)
    if exact is not None:
        lo, hi = float(exact[0]), float(exact[1])
    else:
        lo, hi = 0.0, 1.0
        for a in reversed(w):
            b = system.branch(a)
            lo, hi = float(b.inverse(lo)), float(b.inverse(hi))
            if lo > hi:
                lo, hi = hi, lo
    if hi <= lo:
        # cylinder thinner than float resolution: widen by one ulp
        hi = math.nextafter(lo, math.inf)
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Branch expansion data


def _endpoint_deriv_abs(branch: Branch) -> tuple[float, float]:
    """|T'| at the two closure endpoints (exact rational path when possible)."""
    if branch.rational_deriv_abs is not None and branch.domain_fractions is not None:
        qlo, qhi = branch.domain_fractions
        return (
            float(abs(branch.rational_deriv_abs(qlo))),
            float(abs(branch.rational_deriv_abs(qhi))),
        )
    d = branch.domain
    return abs(float(branch.derivative(d.lo))), abs(float(branch.derivative(d.hi)))


def tau(system: BranchedSystem, n: int) -> float:
    """inf of |T'| over branch n (the smaller endpoint value, T' monotone)."""
    return min(_endpoint_deriv_abs(system.branch(n)))


def sup_deriv(system: BranchedSystem, n: int) -> float:
    """sup of |T'| over branch n (the larger endpoint value)."""
    return max(_endpoint_deriv_abs(system.branch(n)))


# ---------------------------------------------------------------------------
# Preimage pressure sum K_T(s)


def k_t(system: BranchedSystem, s: float, grid_size: int = 1000) -> ValueBracket:
    """Bracket sup over a grid of x of the preimage sum Sum |T'(y)|^(-s).

    The grid spans the closed [0,1] (the sum extends continuously to the
    endpoints); the branch series is summed over the explicit prefix and the
    remainder is bounded through the tail descriptor's tau asymptotics:
    Sum_{n>N} tau_n^(-s) <= c^(-s) * N^(1 - beta*s) / (beta*s - 1).
    For every catalog family the sum is monotone in x, so the grid supremum is
    the true supremum, attained at an endpoint.
    """
    if not 0.0 < s < 1.0:
        raise ConfigError(f"s must lie in (0,1), got {s}")
    if grid_size < 2:
        raise ConfigError("grid_size must be at least 2")
    if system.tail is not None:
        bs = system.tail.tau_power * s
        if bs <= 1.0:
            raise DivergenceError(
                f"preimage series diverges at s={s}: tail decay exponent "
                f"{bs:.4g} <= 1 (need s > {1.0 / system.tail.tau_power:.4g})"
            )
    x = np.linspace(0.0, 1.0, grid_size)
    total = np.zeros_like(x)
    for b in system.branches:
        y = b.inverse(x)
        total += np.abs(b.derivative(y)) ** (-s)
        if not np.all(np.isfinite(total)):
            raise DivergenceError(f"preimage sum overflowed at s={s}")
    partial_sup = float(np.max(total))
    tail_bound = 0.0
    if system.tail is not None:
        t = system.tail
        n0 = max(system.n_branches, t.valid_from)
        bs = t.tau_power * s
        tail_bound = t.tau_coeff ** (-s) * n0 ** (1.0 - bs) / (bs - 1.0)
        if not math.isfinite(tail_bound):
            raise DivergenceError(f"tail bound infinite at s={s}")
    return ValueBracket(partial_sup, partial_sup + tail_bound, depth=1)


# ---------------------------------------------------------------------------
# Critical exponent estimate


def _branch_lengths(system: BranchedSystem, idx: np.ndarray) -> np.ndarray:
    if system.domain_rule is not None:
        lo, hi = system.domain_rule(idx)
        return np.asarray(hi) - np.asarray(lo)
    return np.array([system.branch(int(n)).domain.width for n in idx])


_S0_FIT_CAP = 2000
_S0_RESIDUAL_THRESHOLD = 0.05


def s0_estimate(system: BranchedSystem, tol: float = 0.02) -> Interval:
    """Interval around the series-convergence threshold inf{s: Sum |I_n|^s < oo}.

    Finite families converge for every positive exponent, so the threshold is
    0.  Countable families get a least-squares fit of log|I_n| against log n
    over the upper half of the explicit prefix (capped at 2000 indices); the
    threshold estimate is -1/slope, widened by three slope standard errors
    plus the drift between the half-window and quarter-window fits.  A fit
    whose residuals exceed the power-law threshold raises InconclusiveError
    with the diagnostics attached.
    """
    if tol <= 0:
        raise ConfigError("tol must be positive")
    if system.finite or system.tail is None:
        return Interval(0.0, min(tol, 1.0))
    count = min(system.n_branches, _S0_FIT_CAP)
    if count < 100:
        raise ConfigError("need at least 100 explicit branches for the fit")
    top = system.n_branches
    idx = np.arange(top - count + 1, top + 1, dtype=np.float64)
    half = idx[idx >= idx[0] + 0.5 * (idx[-1] - idx[0])]

    def fit(ns):
        xs = np.log(ns)
        ys = np.log(_branch_lengths(system, ns))
        A = np.vstack([xs, np.ones_like(xs)]).T
        coef, res, _, _ = np.linalg.lstsq(A, ys, rcond=None)
        slope = coef[0]
        resid = ys - A @ coef
        rms = float(np.sqrt(np.mean(resid**2)))
        denom = float(np.sum((xs - xs.mean()) ** 2))
        stderr = float(np.sqrt(np.sum(resid**2) / max(len(ns) - 2, 1) / denom))
        return slope, rms, stderr

    slope, rms, stderr = fit(idx)
    slope_q, _, _ = fit(half)
    if rms > _S0_RESIDUAL_THRESHOLD or slope >= -1e-6:
        raise InconclusiveError(
            f"branch lengths do not follow a power law (fit rms {rms:.3g})",
            diagnostics={"slope": slope, "rms": rms, "stderr": stderr},
        )
    s0 = -1.0 / slope
    drift = abs(-1.0 / slope_q - s0)
    widen = (3.0 * stderr) / slope**2 + drift + 0.1 * tol
    lo = float(max(0.0, s0 - widen))
    hi = float(min(1.0, s0 + widen))
    if hi - lo > tol:
        raise InconclusiveError(
            f"threshold uncertainty {hi - lo:.3g} exceeds tol {tol}",
            diagnostics={"slope": slope, "rms": rms, "stderr": stderr},
        )
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Condition validation


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    detail: str
    witness: Optional[float] = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    s0: Optional[Interval]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __iter__(self):
        return iter(self.checks)


def _check_partition(system: BranchedSystem) -> ConditionCheck:
    nb = system.n_branches
    if system.domain_rule is not None:
        idx = np.arange(1, nb + 1)
        lo, hi = system.domain_rule(idx)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
    else:
        lo = np.array([b.domain.lo for b in system.branches])
        hi = np.array([b.domain.hi for b in system.branches])
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    gaps = np.abs(lo[1:] - hi[:-1])
    bad = np.nonzero(gaps > 1e-12)[0]
    if bad.size:
        i = int(bad[0])
        return ConditionCheck(
            "partition", False,
            f"adjacent domains mismatch at x={hi[i]:.12g} "
            f"(gap/overlap {lo[i + 1] - hi[i]:+.3g})",
            witness=float(hi[i]),
        )
    if abs(hi[-1] - 1.0) > 1e-12:
        return ConditionCheck(
            "partition", False,
            f"domains end at {hi[-1]:.12g}, not 1", witness=float(hi[-1]),
        )
    left_covered = lo[0] <= 1e-12 or (system.tail is not None and lo[0] <= 0.01)
    if not left_covered:
        return ConditionCheck(
            "partition", False,
            f"uncovered gap (0, {lo[0]:.6g}) with no tail descriptor",
            witness=float(lo[0]),
        )
    return ConditionCheck(
        "partition", True,
        f"{nb} explicit domains tile ({lo[0]:.3g}, 1) with shared endpoints"
        + ("; tail covers the rest" if lo[0] > 1e-12 else ""),
    )


def _sample_branches(system: BranchedSystem) -> list:
    picks = list(range(1, min(system.n_branches, 20) + 1))
    if system.n_branches > 20:
        picks += [
            n for n in (50, 200, 1000, system.n_branches) if n > 20 and n <= system.n_branches
        ]
    return sorted(set(picks))


def _check_deriv_monotone(system: BranchedSystem, samples: int) -> ConditionCheck:
    for n in _sample_branches(system):
        b = system.branch(n)
        d = b.domain
        xs = np.linspace(d.lo, d.hi, max(samples, 3))
        dv = np.asarray(b.derivative(xs), dtype=float)
        diffs = np.diff(dv)
        scale = max(float(np.max(np.abs(dv))), 1.0)
        want_up = b.derivative_monotone == "increasing"
        ok = np.all(diffs >= -1e-9 * scale) if want_up else np.all(diffs <= 1e-9 * scale)
        if not ok:
            i = int(np.argmax(diffs < 0) if want_up else np.argmax(diffs > 0))
            return ConditionCheck(
                "derivative-monotone", False,
                f"branch {n} derivative not {b.derivative_monotone} near x={xs[i]:.9g}",
                witness=float(xs[i]),
            )
    return ConditionCheck(
        "derivative-monotone", True,
        "T' weakly monotone on each sampled branch",
    )


def _check_second_iterate(system: BranchedSystem, samples: int) -> ConditionCheck:
    if system.orientation != "reversing":
        return ConditionCheck(
            "second-iterate-monotone", True,
            "orientation preserving; second-iterate condition not required",
        )
    reach = min(system.n_branches, 8)
    pts = max(samples // 10, 5)
    for n in range(1, reach + 1):
        for m in range(1, reach + 1):
            cyl = cylinder_interval(system, (n, m))
            xs = np.linspace(cyl.lo, cyl.hi, pts)
            bn = system.branch(n)
            d2 = np.asarray(bn.derivative(xs), dtype=float) * np.asarray(
                system.branch(m).derivative(bn.forward(xs)), dtype=float
            )
            diffs = np.diff(d2)
            scale = max(float(np.max(np.abs(d2))), 1.0)
            if not (np.all(diffs >= -1e-8 * scale) or np.all(diffs <= 1e-8 * scale)):
                return ConditionCheck(
                    "second-iterate-monotone", False,
                    f"(T^2)' changes direction inside the ({n},{m}) cylinder",
                    witness=float(xs[0]),
                )
    return ConditionCheck(
        "second-iterate-monotone", True,
        f"(T^2)' monotone on each sampled double cylinder (up to {reach}x{reach})",
    )


def _refined_iterate_min(system: BranchedSystem, n_symbols: int, level: int) -> float:
    """Lower bound on |(T^level)'| over words in {1..n_symbols}^level.

    Per-factor minima over suffix cylinders: for each word, every factor
    |T'(T^i x)| is bounded below by its minimum over the suffix cylinder the
    orbit point lives in.  Endpoint evaluation suffices since T' is monotone
    per branch.
    """
    branches = [system.branch(a) for a in range(1, n_symbols + 1)]

    def logabs_deriv(b, x):
        return np.log(np.abs(np.asarray(b.derivative(x), dtype=np.float64)))

    cur_lo = np.array([b.domain.lo for b in branches])
    cur_hi = np.array([b.domain.hi for b in branches])
    total_min = np.minimum(
        np.array([float(logabs_deriv(b, b.domain.lo)) for b in branches]),
        np.array([float(logabs_deriv(b, b.domain.hi)) for b in branches]),
    )
    for _ in range(1, level):
        block = cur_lo.size
        new_lo = np.empty(n_symbols * block)
        new_hi = np.empty_like(new_lo)
        new_fmin = np.empty_like(new_lo)
        for j, b in enumerate(branches):
            p, q = b.inverse(cur_lo), b.inverse(cur_hi)
            l, h = np.minimum(p, q), np.maximum(p, q)
            sl = slice(j * block, (j + 1) * block)
            new_lo[sl], new_hi[sl] = l, h
            new_fmin[sl] = np.minimum(logabs_deriv(b, l), logabs_deriv(b, h))
        # suffix sums from the previous level: orbit of an (a,v) cylinder
        # continues through the v cylinder
        total_min = new_fmin + np.tile(total_min, n_symbols)
        cur_lo, cur_hi = new_lo, new_hi
    return float(np.exp(np.min(total_min)))


def _check_expanding_iterate(system: BranchedSystem) -> ConditionCheck:
    caps = {1: 200, 2: 140, 3: 27, 4: 11}
    tau_explicit_min = min(tau(system, n) for n in _sample_branches(system))
    details = []
    for level in range(1, 5):
        n_sym = min(system.n_branches, caps[level])
        refined = _refined_iterate_min(system, n_sym, level)
        if n_sym < system.n_branches or system.tail is not None:
            # Any word through an un-enumerated symbol keeps a product
            # >= tau_{N+1} * tau_min^(level-1).
            nxt = (
                tau(system, n_sym + 1)
                if n_sym + 1 <= system.n_branches
                else system.tau_lower(system.n_branches + 1)
            )
            tail_word = nxt * min(tau_explicit_min, 1.0) ** (level - 1)
            refined = min(refined, tail_word)
        details.append(f"l={level}: {refined:.4g}")
        if refined > 1.02:
            return ConditionCheck(
                "expanding-iterate", True,
                f"iterate {level} expands with refined factor {refined:.4g} "
                f"(declared l={system.expansion_iterate})",
            )
    return ConditionCheck(
        "expanding-iterate", False,
        "no iterate up to 4 certified expanding (" + ", ".join(details) + ")",
    )


def _check_renyi(system: BranchedSystem, samples: int) -> ConditionCheck:
    worst = 0.0
    arg = None
    for n in _sample_branches(system):
        b = system.branch(n)
        if b.second_derivative is None:
            continue
        d = b.domain
        xs = np.linspace(d.lo, d.hi, max(samples, 3))
        num = float(np.max(np.abs(np.asarray(b.second_derivative(xs), dtype=float))))
        ratio = num / tau(system, n) ** 2
        if not math.isfinite(ratio):
            return ConditionCheck(
                "renyi-ratio", False,
                f"distortion ratio non-finite on branch {n}",
                witness=float(d.lo),
            )
        if ratio > worst:
            worst, arg = ratio, n
    detail = (
        f"max sampled |T''| / tau^2 = {worst:.4g} at branch {arg}"
        if arg is not None
        else "all branches affine; ratio 0"
    )
    return ConditionCheck("renyi-ratio", True, detail)


def _check_series(system: BranchedSystem) -> tuple[ConditionCheck, Optional[Interval]]:
    try:
        s0 = s0_estimate(system, tol=0.05)
    except InconclusiveError as e:
        return (
            ConditionCheck("length-series", False, f"threshold fit failed: {e}"),
            None,
        )
    ok = s0.hi < 1.0
    detail = f"convergence threshold in [{s0.lo:.4f}, {s0.hi:.4f}]"
    if not ok:
        detail += " (not certified < 1)"
    return ConditionCheck("length-series", ok, detail), s0


def validate(system: BranchedSystem, samples: int = 100) -> ValidationReport:
    """Numerically spot-check the standing branched-system conditions.

    Checks: partition tiling, per-branch monotonicity of T', second-iterate
    monotonicity (orientation-reversing systems only), existence of an
    expanding iterate up to l <= 4, a finite sampled distortion ratio, and
    convergence of the length series through the threshold fit.  Failures are
    report entries with witnesses, never exceptions.
    """
    if samples < 3:
        raise ConfigError("samples must be at least 3")
    series_check, s0 = _check_series(system)
    checks = (
        _check_partition(system),
        _check_deriv_monotone(system, samples),
        _check_second_iterate(system, samples),
        _check_expanding_iterate(system),
        _check_renyi(system, samples),
        series_check,
    )
    return ValidationReport(checks=checks, s0=s0)
