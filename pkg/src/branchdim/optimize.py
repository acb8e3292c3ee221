"""Dimension maximization over the L-symbol probability simplex.

The objective is the smooth midpoint estimate entropy/expansion at fixed
cylinder depth; gradients are analytic (cylinder masses differentiate via
symbol counts, the ratio via the quotient rule).  Ascent is projected
gradient with backtracking line search and deterministic multi-start.  The
reported dimension re-certifies the optimum with the bracketed estimator, so
the point objective only steers the search.

For affine systems the optimum has the closed form p_i = l_i^s with s the
root of the length Moran equation; moran_root provides it as an independent
oracle, and grid_oracle brute-forces small simplices for cross-checks.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .brackets import ValueBracket
from .errors import BudgetError, ConfigError
from .measures import (
    DEFAULT_WORD_BUDGET,
    ProbVector,
    _check_support_budget,
    _tables,
    default_depth,
    dimension_bracket,
    entropy,
)
from .systems import BranchedSystem, tau

__all__ = [
    "MaximizerResult",
    "maximize_dimension",
    "grid_oracle",
    "moran_root",
    "SweepReport",
    "sweep_L",
    "records_to_csv",
    "records_to_json",
]

_WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class MaximizerResult:
    p_opt: ProbVector
    dim: ValueBracket
    L: int
    depth: int
    kkt_residual: float
    iterations: int
    converged: bool

    def __post_init__(self):
        if self.kkt_residual < 0:
            raise ConfigError("KKT residual cannot be negative")
        if any(i > self.L for i in self.p_opt.support()):
            raise ConfigError("optimum support escapes the first L symbols")


# ---------------------------------------------------------------------------
# Objective plumbing


class _Objective:
    """Midpoint dimension on the full {1..L} simplex at fixed depth."""

    def __init__(self, system: BranchedSystem, L: int, depth: int, budget: int):
        support = tuple(range(1, L + 1))
        _check_support_budget(system, support, depth, budget)
        t = _tables(system, support, depth)
        self.depth = depth
        self.counts = t.counts            # (L^depth, L)
        self.logd = t.mid_logd            # (L^depth,)
        self.weighted = self.counts * self.logd[:, None]

    def masses(self, p: np.ndarray) -> np.ndarray:
        pc = np.maximum(p, 1e-300)
        return np.exp(self.counts @ np.log(pc))

    def value(self, p: np.ndarray) -> float:
        m = self.masses(p)
        chi = float(m @ self.logd) / self.depth
        h = -math.fsum(float(w) * math.log(w) for w in p if w > 0.0)
        return h / chi

    def value_grad(self, p: np.ndarray):
        pc = np.maximum(p, _WEIGHT_FLOOR)
        m = self.masses(pc)
        chi = float(m @ self.logd) / self.depth
        h = -math.fsum(float(w) * math.log(w) for w in pc)
        # d chi / d p_i = (1/depth) sum_w (count_i(w)/p_i) m_w logd_w
        dchi = (m @ self.weighted) / (pc * self.depth)
        dh = -(np.log(pc) + 1.0)
        grad = (dh * chi - h * dchi) / chi**2
        return h / chi, grad


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the simplex, tiny weights clipped away."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / np.arange(1, len(v) + 1) > 0)[0][-1]
    w = np.maximum(v - css[rho] / (rho + 1.0), 0.0)
    w[w < _WEIGHT_FLOOR] = 0.0
    return w / w.sum()


def _kkt_residual(p: np.ndarray, grad: np.ndarray) -> float:
    """Max deviation of the simplex-projected gradient from zero.

    On the support the gradient must be constant; off it, no component may
    beat that constant (moving mass in would improve).
    """
    active = p > 0.0
    lam = float(np.mean(grad[active]))
    res = float(np.max(np.abs(grad[active] - lam)))
    if not active.all():
        res = max(res, float(np.max(grad[~active] - lam, initial=0.0)))
    return res


def _ascend(obj: _Objective, p0: np.ndarray, max_iters: int, tol: float):
    p = _project_simplex(p0.copy())
    f, grad = obj.value_grad(p)
    kkt = _kkt_residual(p, grad)
    it = 0
    for it in range(1, max_iters + 1):
        if kkt < tol:
            break
        step = 1.0
        moved = False
        for _ in range(40):
            cand = _project_simplex(p + step * grad)
            delta = cand - p
            gain = float(grad @ delta)
            if gain <= 0.0:
                break
            fc = obj.value(cand)
            if fc >= f + 1e-4 * gain:
                p, f = cand, fc
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        f, grad = obj.value_grad(p)
        kkt = _kkt_residual(p, grad)
    return p, f, kkt, it


def maximize_dimension(system: BranchedSystem, L: int, depth: int, *,
                       max_iters: int = 300, tol: float = 1e-6,
                       seeds: int = 5,
                       budget: int = DEFAULT_WORD_BUDGET) -> MaximizerResult:
    """Best Bernoulli dimension over weight vectors on the first L branches.

    Projected gradient ascent on the midpoint objective, multi-start from
    `seeds` random interior points plus the uniform vector (fixed generator,
    bitwise deterministic).  Ties within 1e-12 of the best value resolve to
    the largest first weight.  The returned dim is a fresh certified bracket
    at the optimum, not the search objective.
    """
    if L < 1:
        raise ConfigError("need at least one symbol")
    if depth < 1:
        raise ConfigError("depth must be a positive integer")
    if L == 1:
        p = ProbVector((1.0,))
        dim = dimension_bracket(system, p, depth, budget=budget)
        return MaximizerResult(p, dim, 1, depth, 0.0, 0, True)

    obj = _Objective(system, L, depth, budget)
    rng = np.random.default_rng(0)
    starts = [np.full(L, 1.0 / L)]
    starts += [rng.dirichlet(np.ones(L)) for _ in range(seeds)]

    best = None
    for p0 in starts:
        p, f, kkt, it = _ascend(obj, p0, max_iters, tol)
        cand = (f, float(p[0]), p, kkt, it)
        if best is None:
            best = cand
            continue
        if f > best[0] + 1e-12 or (abs(f - best[0]) <= 1e-12 and cand[1] > best[1]):
            best = cand
    _, _, p, kkt, it = best

    p_opt = ProbVector.from_array(p)
    dim = dimension_bracket(system, p_opt, depth, budget=budget)
    return MaximizerResult(p_opt, dim, L, depth, kkt, it, kkt < tol)


def grid_oracle(system: BranchedSystem, L: int, resolution: float,
                depth: int, *,
                budget: int = DEFAULT_WORD_BUDGET) -> MaximizerResult:
    """Exhaustive midpoint-dimension search on a simplex grid, L <= 3.

    Independent of the ascent path: evaluates every grid point in one batch
    and returns the best, re-certified.  Brute force only; the resolution
    times the word count must stay within budget.
    """
    if L < 1 or L > 3:
        raise ConfigError("grid oracle only covers 1 <= L <= 3 symbols")
    if depth < 1:
        raise ConfigError("depth must be a positive integer")
    if not 0.0 < resolution <= 1.0:
        raise ConfigError("resolution must lie in (0, 1]")
    if L == 1:
        p = ProbVector((1.0,))
        dim = dimension_bracket(system, p, depth, budget=budget)
        return MaximizerResult(p, dim, 1, depth, 0.0, 1, True)

    N = int(round(1.0 / resolution))
    if N < 1:
        raise ConfigError("resolution coarser than the whole simplex")
    n_pts = N + 1 if L == 2 else (N + 1) * (N + 2) // 2
    if n_pts * len(range(1, L + 1)) ** depth > 20 * budget:
        raise BudgetError(
            f"{n_pts} grid points x {L}^{depth} words exceed the "
            f"evaluation budget; coarsen the resolution"
        )
    obj = _Objective(system, L, depth, budget)
    if L == 2:
        pts = [(i, N - i) for i in range(N + 1)]
    else:
        pts = [(i, j, N - i - j)
               for i in range(N + 1) for j in range(N + 1 - i)]
    grid = np.array(pts, dtype=np.float64) / N      # (G, L)
    logp = np.log(np.maximum(grid, 1e-300))
    m = np.exp(obj.counts @ logp.T)                 # (L^depth, G)
    chi = (m.T @ obj.logd) / depth
    with np.errstate(divide="ignore", invalid="ignore"):
        hs = -np.sum(np.where(grid > 0, grid * np.log(np.maximum(grid, 1e-300)), 0.0), axis=1)
    vals = np.where(chi > 0, hs / chi, 0.0)
    order = np.lexsort((-grid[:, 0], -vals))
    ibest = order[0]
    p_opt = ProbVector.from_array(grid[ibest])
    dim = dimension_bracket(system, p_opt, depth, budget=budget)
    return MaximizerResult(p_opt, dim, L, depth, 0.0, len(pts), True)


def moran_root(lengths) -> float:
    """Unique s in [0, 1] with sum(lengths_i ** s) = 1, to 1e-12.

    One length alone gives 0; lengths tiling the unit interval give 1; a
    total above 1 is not a disjoint partition subset and is rejected.
    """
    ls = [float(x) for x in lengths]
    if not ls:
        raise ConfigError("need at least one length")
    if any(not 0.0 < x < 1.0 for x in ls):
        raise ConfigError("lengths must lie strictly inside (0, 1)")
    total = math.fsum(ls)
    if total > 1.0 + 1e-12:
        raise ConfigError(f"lengths sum to {total:.12g} > 1; not a disjoint partition")
    if len(ls) == 1:
        return 0.0
    if abs(total - 1.0) <= 1e-12:
        return 1.0

    def f(s):
        return math.fsum(x**s for x in ls) - 1.0

    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Sweeps over the symbol count


@dataclass(frozen=True)
class SweepReport:
    """Maximizers for L = 1..L_max plus trend diagnostics.

    Iterates like a sequence of MaximizerResult.  p_trend maps each branch
    index to the sequence of its optimal weights as L grows; decay_constants
    holds, per L, the smallest C with p_i <= C / tau_i^alpha over the support.
    """

    results: tuple
    p_trend: dict
    decay_constants: tuple
    alpha: float

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    def __getitem__(self, i):
        return self.results[i]


def sweep_L(system: BranchedSystem, L_max: int, *,
            alpha: float = 0.75,
            budget: int = DEFAULT_WORD_BUDGET,
            max_iters: int = 300, tol: float = 1e-6,
            seeds: int = 5) -> SweepReport:
    """Maximize over L = 1..L_max with budget-scaled depth per L."""
    if L_max < 1:
        raise ConfigError("need at least one symbol count")
    results = []
    for L in range(1, L_max + 1):
        depth = default_depth(L, budget)
        results.append(maximize_dimension(system, L, depth, max_iters=max_iters,
                                          tol=tol, seeds=seeds, budget=budget))
    trend = {}
    for i in range(1, L_max + 1):
        trend[i] = tuple(r.p_opt.weight(i) for r in results if r.L >= i)
    consts = []
    for r in results:
        c = max(r.p_opt.weight(i) * tau(system, i) ** alpha
                for i in r.p_opt.support())
        consts.append(c)
    return SweepReport(tuple(results), trend, tuple(consts), alpha)


# ---------------------------------------------------------------------------
# Record emission

_FIELDS = ("L", "depth", "p", "dim_lo", "dim_hi", "kkt_residual", "converged")


def _record(r: MaximizerResult) -> dict:
    return {
        "L": r.L,
        "depth": r.depth,
        "p": list(r.p_opt.weights),
        "dim_lo": r.dim.lo,
        "dim_hi": r.dim.hi,
        "kkt_residual": r.kkt_residual,
        "converged": r.converged,
    }


def records_to_json(results) -> str:
    return json.dumps([_record(r) for r in results], indent=2)


def records_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in results:
        rec = _record(r)
        rec["p"] = " ".join(repr(x) for x in rec["p"])
        rec["converged"] = str(rec["converged"]).lower()
        w.writerow(rec)
    return buf.getvalue()
