"""Acceptance gate: one test per criterion, tolerances pinned up front.

Frozen oracle values (computed independently before the implementation):
  - coarse depth-2 expansion upper bound, 3 uniform symbols:  1.7981167502201234
  - matching dimension lower bound:                           0.61097939749108
  - invariant-measure masses: mu(1) = 0.4150374992788437,
    mu(2) = 0.16992500144231237, mu(12) = 0.07038932789139801,
    factorization deviation = 1.3591977217322637e-4
  - tangent periodic pair: 0.816890147506112 with (T^3)' 72.0359013755393,
    0.788730211029897 with (T^3)' 72.0120122446479
  - Moran roots of the affine length prefixes: L=2 0.600966851613675
    at p = (0.659311955892103, 0.340688044107897), L=3 0.758399484004808,
    L=4 0.829181678513055
  - length-weight dimensions on the affine family, prefix renormalized:
    L=10 0.939342345, L=50 0.989522029, L=200 0.997498068
"""

import math
import re
import time

import numpy as np
import pytest

from branchdim.cli import main
from branchdim.gapcert import (
    bernoulli_factorization_test,
    certificate_search,
    gauss_cylinder_measure,
    periodic_point,
)
from branchdim.measures import (
    ProbVector,
    dimension_bracket,
    entropy,
    entropy_shift_derivative,
    lyapunov_bracket,
    mass_transfer,
    midpoint_lyapunov,
    transfer_improves,
)
from branchdim.optimize import _Objective, grid_oracle, maximize_dimension, moran_root, sweep_L
from branchdim.systems import s0_estimate


def _cli_dim_coarse(capsys):
    t0 = time.perf_counter()
    code = main(["dim", "--system", "gauss", "--p", "1/3,1/3,1/3",
                 "--depth", "2", "--coarse-bound"])
    elapsed = time.perf_counter() - t0
    out = capsys.readouterr().out
    return code, out, elapsed


def test_criterion_01_coarse_expansion_upper_bound(capsys):
    code, out, elapsed = _cli_dim_coarse(capsys)
    assert code == 0
    chi_hi = float(re.search(r"expansion: \[[-\d.e+]+, ([-\d.e+]+)\]", out).group(1))
    assert abs(chi_hi - 1.79811675) <= 1e-4
    assert elapsed < 1.0


def test_criterion_02_dimension_lower_bound(capsys):
    code, out, _ = _cli_dim_coarse(capsys)
    assert code == 0
    dim_lo = float(re.search(r"dimension: \[([-\d.e+]+),", out).group(1))
    assert dim_lo >= 0.6109
    assert abs(dim_lo - 0.611) <= 5e-4


def test_criterion_03_tangent_periodic_points(tangent):
    t0 = time.perf_counter()
    a = periodic_point(tangent, (3, 2, 1))
    b = periodic_point(tangent, (3, 1, 2))
    elapsed = time.perf_counter() - t0
    assert a.point == pytest.approx(0.817, abs=1e-3)
    assert b.point == pytest.approx(0.789, abs=1e-3)
    assert math.exp(a.cycle_log_derivative) == pytest.approx(72.036, abs=0.01)
    assert math.exp(b.cycle_log_derivative) == pytest.approx(72.012, abs=0.01)
    assert elapsed < 1.0


def test_criterion_04_series_threshold_half(gauss):
    iv = s0_estimate(gauss)
    assert 0.48 <= iv.lo <= iv.hi <= 0.52


def test_criterion_05_invariant_measure_not_bernoulli():
    report = bernoulli_factorization_test(gauss_cylinder_measure, [(1, 2)], 1e-5)
    entry = report.entries[0]
    # closed forms: log(21/20), log(4/3), log(9/8), all over log 2
    assert abs(entry.deviation - 1.3591977217322637e-4) <= 1e-6
    assert entry.witness and not report.bernoulli_consistent
    # order-swapped cylinders carry equal mass, in exact rationals
    assert entry.reversal_gap <= 1e-12


def test_criterion_06_shift_derivative_vs_finite_differences():
    rng = np.random.default_rng(12345)
    checked = 0
    while checked < 100:
        L = int(rng.integers(2, 9))
        p = ProbVector(tuple(rng.dirichlet(np.ones(L))))
        n = int(rng.integers(2, L + 1))
        eps = float(rng.uniform(0.0, 0.8 * min(p.weight(n), 1.0 - p.weight(1))))
        if p.weight(n) - eps < 0.02:
            continue
        d = entropy_shift_derivative(p, eps, n)
        if abs(d) < 0.05:
            continue
        delta = 1e-5

        def gap(e):
            return entropy(p) - entropy(mass_transfer(p, e, n))

        fd = (gap(eps + delta) - gap(eps - delta)) / (2 * delta)
        assert abs(fd - d) <= 1e-6 * abs(d)
        checked += 1


def test_criterion_07_affine_closed_form_oracle(luroth):
    lengths = [1.0 / (n * (n + 1)) for n in range(1, 5)]
    moran = {2: 0.600966851613675, 3: 0.758399484004808, 4: 0.829181678513055}
    r2 = maximize_dimension(luroth, 2, 1)
    assert r2.dim.midpoint == pytest.approx(moran_root(lengths[:2]), abs=1e-3)
    assert r2.p_opt.weight(1) == pytest.approx(0.6593, abs=1e-3)
    assert r2.p_opt.weight(2) == pytest.approx(0.3407, abs=1e-3)
    for L in (2, 3, 4):
        root = moran_root(lengths[:L])
        assert root == pytest.approx(moran[L], abs=1e-9)
        r = maximize_dimension(luroth, L, 4)
        assert r.dim.midpoint == pytest.approx(root, abs=1e-3)


def test_criterion_08_sweep_monotone(gauss):
    report = sweep_L(gauss, 5)
    mids = [r.dim.midpoint for r in report]
    widths = [r.dim.width for r in report]
    for i in range(4):
        assert mids[i + 1] >= mids[i] - 2.0 * max(widths[i], widths[i + 1])


def test_criterion_09_grid_oracle_equivalence(gauss):
    asc = maximize_dimension(gauss, 2, 6)
    grid = grid_oracle(gauss, 2, 1 / 400, 6)
    a = entropy(asc.p_opt) / midpoint_lyapunov(gauss, asc.p_opt, 6)
    g = entropy(grid.p_opt) / midpoint_lyapunov(gauss, grid.p_opt, 6)
    assert abs(a - g) <= 1e-3
    assert abs(asc.dim.midpoint - grid.dim.midpoint) <= 1e-3


def test_criterion_10_length_weights_approach_full_dimension(luroth):
    pinned = {10: 0.939342345, 50: 0.989522029, 200: 0.997498068}
    dims = {}
    for L in (10, 50, 200):
        n = np.arange(1, L + 1)
        w = 1.0 / (n * (n + 1))
        p = ProbVector(tuple(w / w.sum()))
        dims[L] = dimension_bracket(luroth, p, 1).midpoint
        assert dims[L] == pytest.approx(pinned[L], abs=1e-6)
    assert dims[10] < dims[50] < dims[200]
    assert dims[200] > 0.95


class TestCriterion11PropertySuite:
    def test_bracket_nesting(self, gauss):
        p = ProbVector((0.5, 0.3, 0.2))
        brs = [lyapunov_bracket(gauss, p, d) for d in (2, 3, 4, 5)]
        for a, b in zip(brs, brs[1:]):
            assert a.intersects(b)
            assert b.width <= brs[0].width + 1e-15

    def test_gradient_matches_finite_differences(self, gauss):
        obj = _Objective(gauss, 3, 4, 10**6)
        rng = np.random.default_rng(4242)
        for _ in range(10):
            p = rng.dirichlet(np.ones(3)) * 0.9 + 0.1 / 3
            _, grad = obj.value_grad(p)
            for i in range(3):
                lo, hi = p.copy(), p.copy()
                lo[i] -= 1e-6
                hi[i] += 1e-6
                fd = (obj.value(hi) - obj.value(lo)) / 2e-6
                assert abs(fd - grad[i]) <= 1e-5 * max(1.0, abs(grad[i]))

    def test_affine_multiset_nullity(self, luroth):
        a = periodic_point(luroth, (1, 2, 2, 3)).cycle_log_derivative
        b = periodic_point(luroth, (1, 2, 3, 2)).cycle_log_derivative
        assert a == b
        assert certificate_search(luroth, 3, 4, 1e-6) is None

    def test_gauss_reversal_symmetry(self):
        for n in range(1, 6):
            for m in range(1, 6):
                for k in range(1, 6):
                    w = (n, m, k)
                    assert abs(gauss_cylinder_measure(w)
                               - gauss_cylinder_measure(w[::-1])) <= 1e-12

    def test_decay_constant_stability(self, gauss):
        report = sweep_L(gauss, 6)
        consts = report.decay_constants[1:]  # L = 2..6
        assert len(consts) == 5
        assert all(c > 0 for c in consts)
        assert max(consts) <= 4.0 * min(consts)

    def test_maximizer_locally_optimal_under_transfer(self, gauss):
        r = maximize_dimension(gauss, 3, 6)
        for n in (2, 3):
            assert not transfer_improves(gauss, r.p_opt, n, 1e-3, 6)
