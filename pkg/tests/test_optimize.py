import csv
import io
import json
import math

import numpy as np
import pytest

from branchdim.errors import BudgetError, ConfigError
from branchdim.measures import ProbVector, entropy, midpoint_lyapunov
from branchdim.optimize import (
    MaximizerResult,
    _Objective,
    grid_oracle,
    maximize_dimension,
    moran_root,
    records_to_csv,
    records_to_json,
    sweep_L,
)
from branchdim.systems import build_catalog, tau

LUROTH_LENGTHS = [1.0 / (n * (n + 1)) for n in range(1, 10)]
MORAN_L2 = 0.600966851613675          # bisection on (1/2)^s + (1/6)^s = 1
MORAN_L3 = 0.758399484004808
MORAN_L4 = 0.829181678513055


class TestMoranRoot:
    def test_two_lengths(self):
        assert moran_root([0.5, 1 / 6]) == pytest.approx(MORAN_L2, abs=1e-9)

    def test_luroth_prefixes(self):
        assert moran_root(LUROTH_LENGTHS[:3]) == pytest.approx(MORAN_L3, abs=1e-9)
        assert moran_root(LUROTH_LENGTHS[:4]) == pytest.approx(MORAN_L4, abs=1e-9)

    def test_edges(self):
        assert moran_root([0.5, 0.5]) == 1.0
        assert moran_root([0.25]) == 0.0
        with pytest.raises(ConfigError):
            moran_root([0.7, 0.6])
        with pytest.raises(ConfigError):
            moran_root([])
        with pytest.raises(ConfigError):
            moran_root([1.0])

    def test_root_property(self):
        ls = [0.4, 0.3, 0.1]
        s = moran_root(ls)
        assert math.fsum(l**s for l in ls) == pytest.approx(1.0, abs=1e-10)


class TestMaximize:
    def test_single_symbol(self, gauss):
        r = maximize_dimension(gauss, 1, 4)
        assert r.p_opt.weights == (1.0,)
        assert r.dim.lo == 0.0 and r.dim.hi == 0.0
        assert r.converged

    def test_luroth_two_symbols_closed_form(self, luroth):
        r = maximize_dimension(luroth, 2, 1)
        assert r.converged
        assert r.p_opt.weight(1) == pytest.approx(0.6593, abs=1e-3)
        assert r.p_opt.weight(2) == pytest.approx(0.3407, abs=1e-3)
        assert r.dim.midpoint == pytest.approx(MORAN_L2, abs=1e-3)

    def test_affine_recovers_moran_profile(self, luroth):
        for L in (2, 3, 4):
            s = moran_root(LUROTH_LENGTHS[:L])
            target = [l**s for l in LUROTH_LENGTHS[:L]]
            r = maximize_dimension(luroth, L, 4)
            for i, t in enumerate(target, start=1):
                assert r.p_opt.weight(i) == pytest.approx(t, abs=1e-4)

    def test_simplex_and_kkt_invariants(self, gauss, luroth):
        for system, L in ((gauss, 2), (gauss, 3), (luroth, 4)):
            r = maximize_dimension(system, L, 4)
            assert abs(math.fsum(r.p_opt.weights) - 1.0) <= 1e-12
            assert all(w >= 0.0 for w in r.p_opt.weights)
            assert r.kkt_residual >= 0.0
            assert set(r.p_opt.support()) <= set(range(1, L + 1))

    def test_deterministic(self, gauss):
        a = maximize_dimension(gauss, 3, 4)
        b = maximize_dimension(gauss, 3, 4)
        assert a.p_opt.weights == b.p_opt.weights
        assert a.dim == b.dim

    def test_errors(self, gauss):
        with pytest.raises(ConfigError):
            maximize_dimension(gauss, 0, 4)
        with pytest.raises(ConfigError):
            maximize_dimension(gauss, 2, 0)
        with pytest.raises(BudgetError):
            maximize_dimension(gauss, 2, 30)

    def test_result_validates(self):
        with pytest.raises(ConfigError):
            MaximizerResult(ProbVector((1.0,)), None, 1, 4, -0.5, 3, True)


class TestGradient:
    def test_matches_finite_differences(self, gauss):
        obj = _Objective(gauss, 3, 4, 10**6)
        rng = np.random.default_rng(99)
        delta = 1e-6
        for _ in range(50):
            p = rng.dirichlet(np.ones(3)) * 0.9 + 0.1 / 3  # keep interior
            _, grad = obj.value_grad(p)
            for i in range(3):
                lo, hi = p.copy(), p.copy()
                lo[i] -= delta
                hi[i] += delta
                fd = (obj.value(hi) - obj.value(lo)) / (2 * delta)
                assert abs(fd - grad[i]) <= 1e-5 * max(1.0, abs(grad[i]))


class TestGridOracle:
    def test_single_symbol(self, gauss):
        r = grid_oracle(gauss, 1, 0.1, 3)
        assert r.p_opt.weights == (1.0,) and r.dim.hi == 0.0

    def test_luroth_grid_near_closed_form(self, luroth):
        r = grid_oracle(luroth, 2, 1 / 400, 1)
        assert r.p_opt.weight(1) == pytest.approx(0.66, abs=1e-9)
        assert r.dim.midpoint == pytest.approx(MORAN_L2, abs=1e-3)

    def test_gauss_uniform_feasibility_floor(self, gauss):
        r = grid_oracle(gauss, 3, 1 / 50, 4)
        mid = entropy(r.p_opt) / midpoint_lyapunov(gauss, r.p_opt, 4)
        assert mid >= 0.611 - 0.02

    def test_ascent_never_loses_to_brute_force(self, gauss, luroth):
        cases = ((gauss, 2, 1 / 400, 6), (luroth, 2, 1 / 400, 1))
        for system, L, res, depth in cases:
            asc = maximize_dimension(system, L, depth)
            grid = grid_oracle(system, L, res, depth)
            a = entropy(asc.p_opt) / midpoint_lyapunov(system, asc.p_opt, depth)
            g = entropy(grid.p_opt) / midpoint_lyapunov(system, grid.p_opt, depth)
            assert a >= g - 1e-3

    def test_errors(self, gauss):
        with pytest.raises(ConfigError):
            grid_oracle(gauss, 4, 0.1, 2)
        with pytest.raises(ConfigError):
            grid_oracle(gauss, 2, 0.0, 2)
        with pytest.raises(BudgetError):
            grid_oracle(gauss, 3, 1e-4, 6)


class TestSweep:
    def test_shape_and_trend(self, gauss):
        report = sweep_L(gauss, 3)
        assert len(report) == 3
        assert [r.L for r in report] == [1, 2, 3]
        mids = [r.dim.midpoint for r in report]
        for a, b, ra, rb in zip(mids, mids[1:], report, report[1:]):
            assert b >= a - 2.0 * max(ra.dim.width, rb.dim.width)
        assert report.p_trend[1][0] == 1.0
        assert len(report.p_trend[2]) == 2  # tracked from L = 2 on

    def test_gauss_attains_uniform3_level(self, gauss):
        report = sweep_L(gauss, 3)
        last = report[-1]
        assert last.dim.midpoint >= 0.611 - last.dim.width

    def test_decay_constants_small(self, gauss):
        report = sweep_L(gauss, 3)
        for r, c in zip(report, report.decay_constants):
            assert c > 0
            for i in r.p_opt.support():
                assert r.p_opt.weight(i) <= c / tau(gauss, i) ** report.alpha + 1e-12

    def test_errors(self, gauss):
        with pytest.raises(ConfigError):
            sweep_L(gauss, 0)


class TestRecords:
    def test_csv_json_identical_values(self, luroth):
        results = list(sweep_L(luroth, 2))
        parsed_json = json.loads(records_to_json(results))
        rows = list(csv.DictReader(io.StringIO(records_to_csv(results))))
        assert len(parsed_json) == len(rows) == 2
        for j, c in zip(parsed_json, rows):
            assert j["L"] == int(c["L"])
            assert j["depth"] == int(c["depth"])
            assert j["p"] == [float(x) for x in c["p"].split()]
            assert j["dim_lo"] == float(c["dim_lo"])
            assert j["dim_hi"] == float(c["dim_hi"])
            assert j["kkt_residual"] == float(c["kkt_residual"])
            assert j["converged"] == (c["converged"] == "true")
