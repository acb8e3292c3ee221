"""Bernoulli weight vectors, entropy, and certified dimension brackets.

The pushforward of the Bernoulli measure with weights p assigns mass
m_p([w]) = prod p_{w_i} to the depth-k cylinder of the word w.  Its dimension
is entropy over Lyapunov exponent; the Lyapunov exponent is bracketed by
cylinder sums whose per-factor extremes come from the monotonicity of T' on
branches, and the entropy term is exact (the depth-k cylinder entropy of a
Bernoulli measure is exactly k times the one-step entropy).

Two Lyapunov rules are provided:
  - the default per-factor rule: for each depth-k word, each orbit factor
    log|T'(T^i x)| is bounded over the suffix cylinder the orbit visits;
    summing and averaging the k levels gives certified lo/hi;
  - the coarse rule (coarse=True): extremes of a single application of
    log|T'| over each depth-k cylinder, no 1/k averaging — the classical
    one-step cylinder bound, reproduced bit-for-bit for reference values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .brackets import ValueBracket, certified_sum, down, up
from .errors import BudgetError, ConfigError, IndeterminateError
from .systems import BranchedSystem

__all__ = [
    "ProbVector",
    "entropy",
    "lyapunov_bracket",
    "midpoint_lyapunov",
    "dimension_bracket",
    "truncate_renormalize",
    "mass_transfer",
    "entropy_shift_derivative",
    "DecayReport",
    "decay_check",
    "transfer_improves",
    "DEFAULT_WORD_BUDGET",
    "default_depth",
]

DEFAULT_WORD_BUDGET = 10**6

# absolute per-level slack when any branch inverse is root-solved rather than
# closed-form (endpoint residual 1e-12 through the log-derivative Lipschitz
# factor, padded an order of magnitude)
_ROOT_SOLVED_LEVEL_SLACK = 1e-11


@dataclass(frozen=True)
class ProbVector:
    """Finite probability vector indexed by branch (1-based).

    Weights are nonnegative and sum to 1 within 1e-12.  Index i carries the
    weight of branch i; indices beyond the stored length weigh 0.
    """

    weights: tuple

    def __post_init__(self):
        if not self.weights:
            raise ConfigError("probability vector needs at least one weight")
        ws = tuple(float(w) for w in self.weights)
        if any(w < 0.0 or not math.isfinite(w) for w in ws):
            raise ConfigError("weights must be finite and nonnegative")
        total = math.fsum(ws)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def parse(cls, text: str) -> "ProbVector":
        """Parse a comma/whitespace list of floats or fraction literals.

        Sums within 1e-9 of 1 are renormalized; anything worse is rejected.
        """
        tokens = [t for t in text.replace(",", " ").split() if t]
        if not tokens:
            raise ConfigError("empty probability vector")
        vals = []
        for t in tokens:
            try:
                vals.append(float(Fraction(t)) if "/" in t else float(t))
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigError(f"bad weight {t!r}: {e}") from None
        if any(v < 0 for v in vals):
            raise ConfigError("weights must be nonnegative")
        total = math.fsum(vals)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"weights sum to {total:.12g}; expected 1 within 1e-9")
        return cls(tuple(v / total for v in vals))

    @classmethod
    def uniform(cls, L: int) -> "ProbVector":
        if L < 1:
            raise ConfigError("need at least one symbol")
        return cls((1.0 / L,) * L)

    @classmethod
    def from_array(cls, arr) -> "ProbVector":
        return cls(tuple(float(x) for x in arr))

    def __len__(self) -> int:
        return len(self.weights)

    def weight(self, n: int) -> float:
        if n < 1:
            raise ConfigError("branch indices are 1-based")
        return self.weights[n - 1] if n <= len(self.weights) else 0.0

    def support(self) -> tuple:
        return tuple(i + 1 for i, w in enumerate(self.weights) if w > 0.0)

    def as_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=np.float64)


def entropy(p: ProbVector) -> float:
    """-Sum p_i log p_i with the 0 log 0 = 0 convention."""
    # + 0.0 keeps the point-mass value at +0.0 rather than -0.0
    return -math.fsum(w * math.log(w) for w in p.weights if w > 0.0) + 0.0


def default_depth(n_symbols: int, budget: int = DEFAULT_WORD_BUDGET) -> int:
    """Largest depth <= 8 keeping n_symbols**depth within the word budget."""
    if n_symbols <= 1:
        return 8
    d = int(math.floor(math.log(budget) / math.log(n_symbols)))
    return max(1, min(8, d))


# ---------------------------------------------------------------------------
# Cylinder tables


@dataclass(frozen=True)
class _Level:
    lo: np.ndarray    # cylinder left endpoints, lexicographic word order
    hi: np.ndarray
    fmin: np.ndarray  # min over the cylinder of log|T'| (leading branch)
    fmax: np.ndarray


@dataclass(frozen=True)
class _Tables:
    support: tuple
    depth: int
    levels: tuple          # _Level per depth 1..k
    mid_logd: np.ndarray   # sum over the orbit of log|T'| at cylinder midpoints
    counts: np.ndarray     # (L^k, L) symbol counts per word
    root_solved: bool      # any branch inverse is a root solve


def _build_tables(system: BranchedSystem, support: tuple, depth: int) -> _Tables:
    branches = [system.branch(a) for a in support]
    L = len(branches)

    def flogs(b, x):
        return np.log(np.abs(np.asarray(b.derivative(x), dtype=np.float64)))

    levels = []
    cur_lo = np.array([b.domain.lo for b in branches])
    cur_hi = np.array([b.domain.hi for b in branches])
    e1 = np.array([float(flogs(b, b.domain.lo)) for b in branches])
    e2 = np.array([float(flogs(b, b.domain.hi)) for b in branches])
    levels.append(_Level(cur_lo, cur_hi, np.minimum(e1, e2), np.maximum(e1, e2)))
    for _ in range(1, depth):
        block = cur_lo.size
        new_lo = np.empty(L * block)
        new_hi = np.empty_like(new_lo)
        fmin = np.empty_like(new_lo)
        fmax = np.empty_like(new_lo)
        for j, b in enumerate(branches):
            lo_img, hi_img = b.inverse(cur_lo), b.inverse(cur_hi)
            l = np.minimum(lo_img, hi_img)
            h = np.maximum(lo_img, hi_img)
            sl = slice(j * block, (j + 1) * block)
            new_lo[sl], new_hi[sl] = l, h
            fa, fb = flogs(b, l), flogs(b, h)
            fmin[sl], fmax[sl] = np.minimum(fa, fb), np.maximum(fa, fb)
        levels.append(_Level(new_lo, new_hi, fmin, fmax))
        cur_lo, cur_hi = new_lo, new_hi

    # midpoint orbit sums: digit i of the lexicographic word index is the
    # middle axis of a (L^i, L, L^(k-1-i)) reshape
    x = 0.5 * (cur_lo + cur_hi)
    logd = np.zeros_like(x)
    for i in range(depth):
        xv = x.reshape(L**i, L, -1)
        lv = logd.reshape(L**i, L, -1)
        for j, b in enumerate(branches):
            seg = xv[:, j, :]
            lv[:, j, :] += flogs(b, seg)
            xv[:, j, :] = b.forward(seg)

    counts = np.zeros((1, L))
    eye = np.eye(L)
    for _ in range(depth):
        counts = np.vstack([counts + eye[j] for j in range(L)])

    return _Tables(
        support=support,
        depth=depth,
        levels=tuple(levels),
        mid_logd=logd,
        counts=counts,
        root_solved=any(b.inverse_residual > 0 for b in branches),
    )


def _tables(system: BranchedSystem, support: tuple, depth: int) -> _Tables:
    key = ("cylinder-tables", support, depth)
    t = system.memo.get(key)
    if t is None:
        t = _build_tables(system, support, depth)
        system.memo[key] = t
    return t


def _check_support_budget(system: BranchedSystem, support: tuple, depth: int,
                          budget: int) -> None:
    if depth < 1:
        raise ConfigError("depth must be a positive integer")
    if not support:
        raise ConfigError("probability vector has empty support")
    for a in support:
        if a > system.n_branches:
            raise ConfigError(
                f"support symbol {a} beyond explicit branch range "
                f"1..{system.n_branches}"
            )
    words = len(support) ** depth
    if words > budget:
        raise BudgetError(
            f"{len(support)}^{depth} = {words} cylinder words exceed the "
            f"budget {budget}; lower the depth (suggestion: "
            f"{default_depth(len(support), budget)})"
        )


def _level_masses(p_sup: np.ndarray, depth: int):
    m = p_sup.copy()
    yield m
    for _ in range(1, depth):
        m = np.kron(p_sup, m)
        yield m


def lyapunov_bracket(system: BranchedSystem, p: ProbVector, depth: int, *,
                     coarse: bool = False,
                     budget: int = DEFAULT_WORD_BUDGET) -> ValueBracket:
    """Certified bracket on the expansion rate integral log|T'| d(mu_p).

    Default rule: average over levels j = 1..depth of the cylinder sums
    Sum_w m_p([w]) * extreme over I_w of log|T'|, the per-factor bounds of the
    depth-k orbit sums.  coarse=True keeps only the deepest level without the
    1/depth average: the one-step cylinder rule used for reference upper
    bounds.  Sums run in lexicographic word order and are widened by the
    directed-rounding slack, so results are certified and deterministic.
    """
    support = p.support()
    _check_support_budget(system, support, depth, budget)
    t = _tables(system, support, depth)
    p_sup = np.array([p.weight(a) for a in support])
    extra = _ROOT_SOLVED_LEVEL_SLACK if t.root_solved else 0.0

    if coarse:
        m_top = None
        for m in _level_masses(p_sup, depth):
            m_top = m
        lo, _ = certified_sum(m_top * t.levels[-1].fmin, stages=depth + 8, extra_abs=extra)
        _, hi = certified_sum(m_top * t.levels[-1].fmax, stages=depth + 8, extra_abs=extra)
        return ValueBracket(lo, hi, depth)

    lo_terms, hi_terms = [], []
    for j, m in enumerate(_level_masses(p_sup, depth)):
        lo_j, _ = certified_sum(m * t.levels[j].fmin, stages=j + 9, extra_abs=extra)
        _, hi_j = certified_sum(m * t.levels[j].fmax, stages=j + 9, extra_abs=extra)
        lo_terms.append(lo_j)
        hi_terms.append(hi_j)
    lo = down(math.fsum(lo_terms) / depth)
    hi = up(math.fsum(hi_terms) / depth)
    return ValueBracket(lo, hi, depth)


def midpoint_lyapunov(system: BranchedSystem, p: ProbVector, depth: int, *,
                      budget: int = DEFAULT_WORD_BUDGET) -> float:
    """Uncertified point estimate: depth-k orbit sums at cylinder midpoints.

    Smooth in p (used as the optimization objective); carries no bracket.
    """
    support = p.support()
    _check_support_budget(system, support, depth, budget)
    t = _tables(system, support, depth)
    p_sup = np.array([p.weight(a) for a in support])
    m_top = None
    for m in _level_masses(p_sup, depth):
        m_top = m
    return float(m_top @ t.mid_logd) / depth


def dimension_bracket(system: BranchedSystem, p: ProbVector, depth: int, *,
                      coarse: bool = False,
                      budget: int = DEFAULT_WORD_BUDGET) -> ValueBracket:
    """Certified bracket on entropy / expansion rate for the pushforward.

    Point masses short-circuit to [0, 0].  A Lyapunov bracket touching zero
    cannot be divided through and raises IndeterminateError.
    """
    h = entropy(p)
    if h == 0.0:
        _check_support_budget(system, p.support(), depth, budget)
        return ValueBracket(0.0, 0.0, depth)
    chi = lyapunov_bracket(system, p, depth, coarse=coarse, budget=budget)
    if chi.lo <= 0.0:
        raise IndeterminateError(
            f"expansion bracket [{chi.lo:.6g}, {chi.hi:.6g}] touches zero at "
            f"depth {depth}; deepen the cylinders"
        )
    return ValueBracket(down(h / chi.hi), up(h / chi.lo), depth)


# ---------------------------------------------------------------------------
# Vector surgery


def truncate_renormalize(p: ProbVector, L: int) -> ProbVector:
    """Restrict to the first L indices and renormalize."""
    if L < 1:
        raise ConfigError("prefix length must be positive")
    head = p.weights[:L]
    mass = math.fsum(head)
    if mass <= 0.0:
        raise ConfigError(f"first {L} weights carry zero mass")
    return ProbVector(tuple(w / mass for w in head))


def mass_transfer(p: ProbVector, eps: float, n: int) -> ProbVector:
    """Move eps of mass from index n (>= 2) onto index 1."""
    if n < 2:
        raise ConfigError("transfer source index must be >= 2")
    if n > len(p):
        raise ConfigError(f"index {n} beyond vector length {len(p)}")
    limit = min(p.weight(n), 1.0 - p.weight(1))
    if not 0.0 <= eps <= limit:
        raise ConfigError(
            f"transfer amount {eps} outside [0, {limit:.12g}] for index {n}"
        )
    ws = list(p.weights)
    ws[0] += eps
    ws[n - 1] = max(ws[n - 1] - eps, 0.0)
    return ProbVector(tuple(ws))


def entropy_shift_derivative(p: ProbVector, eps: float, n: int) -> float:
    """d/d eps of [entropy(p) - entropy(transfer by eps from n)].

    Closed form log((p_1 + eps)/(p_n - eps)), valid while both stay positive.
    """
    if n < 2 or n > len(p):
        raise ConfigError(f"index {n} invalid for vector of length {len(p)}")
    top = p.weight(1) + eps
    bot = p.weight(n) - eps
    if not (eps >= 0.0 and bot > 0.0 and top > 0.0 and top < 1.0 + 1e-15):
        raise ConfigError(
            f"shift amount {eps} leaves no mass at index {n} or overfills index 1"
        )
    return math.log(top / bot)


# ---------------------------------------------------------------------------
# Decay class membership


@dataclass(frozen=True)
class DecayReport:
    ok: bool
    first_violation: int | None

    def __bool__(self) -> bool:
        return self.ok


def decay_check(system: BranchedSystem, p: ProbVector, C: float,
                alpha: float) -> DecayReport:
    """Check p_i <= C / tau_i**alpha over the support; report first violation.

    alpha must exceed the tail's series threshold (1/length_power for
    power-law tails) and stay below 1.
    """
    if C <= 0:
        raise ConfigError("decay constant must be positive")
    floor = 1.0 / system.tail.length_power if system.tail is not None else 0.0
    if not floor < alpha < 1.0:
        raise ConfigError(
            f"decay exponent {alpha} outside ({floor:.3g}, 1) for this system"
        )
    from .systems import tau  # local import keeps module deps one-way

    for i in p.support():
        if p.weight(i) > C / tau(system, i) ** alpha:
            return DecayReport(False, i)
    return DecayReport(True, None)


def transfer_improves(system: BranchedSystem, p: ProbVector, n: int,
                      eps: float, depth: int, *,
                      budget: int = DEFAULT_WORD_BUDGET) -> bool:
    """Certified strict improvement test for the mass transfer toward index 1.

    True only when the transferred vector's dimension bracket lies entirely
    above the original's: lo(transferred) > hi(original) at the given depth.
    """
    q = mass_transfer(p, eps, n)
    moved = dimension_bracket(system, q, depth, budget=budget)
    base = dimension_bracket(system, p, depth, budget=budget)
    return moved.lo > base.hi
