import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from branchdim.errors import BudgetError, ConfigError, NonContractionError
from branchdim.gapcert import (
    FactorizationReport,
    GapCertificate,
    PeriodicOrbit,
    bernoulli_factorization_test,
    certificate_search,
    certificate_to_json,
    certificate_to_text,
    forward_orbit,
    gauss_cylinder_measure,
    periodic_point,
)
from branchdim.loader import system_from_config
from branchdim.systems import cylinder_interval

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

gauss_words = st.lists(st.integers(1, 5), min_size=1, max_size=5).map(tuple)


class TestPeriodicPoint:
    def test_golden_fixed_point(self, gauss):
        o = periodic_point(gauss, (1,))
        assert o.point == pytest.approx(GOLDEN, abs=1e-10)
        assert math.exp(o.cycle_log_derivative) == pytest.approx(1.0 / GOLDEN**2,
                                                                 abs=1e-9)
        assert o.residual <= 1e-9

    def test_tangent_printed_pair(self, tangent):
        a = periodic_point(tangent, (3, 2, 1))
        b = periodic_point(tangent, (3, 1, 2))
        assert a.point == pytest.approx(0.817, abs=5e-4)
        assert math.exp(a.cycle_log_derivative) == pytest.approx(72.036, abs=0.01)
        assert b.point == pytest.approx(0.789, abs=5e-4)
        assert math.exp(b.cycle_log_derivative) == pytest.approx(72.012, abs=0.01)

    @given(w=gauss_words)
    def test_orbit_invariants(self, gauss, w):
        o = periodic_point(gauss, w)
        assert o.residual <= 1e-9
        assert cylinder_interval(gauss, w).contains(o.point, tol=1e-9)
        xs = forward_orbit(gauss, w, o.point)
        for a, x in zip(w, xs):
            assert gauss.branch(a).domain.contains(x, tol=1e-9)

    @given(w=gauss_words, shift=st.integers(1, 4))
    def test_rotation_shares_cycle_derivative(self, gauss, w, shift):
        shift %= len(w)
        rot = w[shift:] + w[:shift]
        a = periodic_point(gauss, w)
        b = periodic_point(gauss, rot)
        assert abs(a.cycle_log_derivative - b.cycle_log_derivative) <= 1e-10

    def test_affine_multiset_nullity_exact(self, luroth):
        # affine cycle derivatives depend only on the symbol counts
        a = periodic_point(luroth, (1, 2, 3)).cycle_log_derivative
        b = periodic_point(luroth, (1, 3, 2)).cycle_log_derivative
        c = periodic_point(luroth, (2, 1, 3)).cycle_log_derivative
        assert a == b == c

    def test_contraction_is_geometric(self, gauss):
        word = (1, 2)
        branches = [gauss.branch(a) for a in word]
        x = cylinder_interval(gauss, word).midpoint
        diffs = []
        for _ in range(30):
            y = x
            for b in reversed(branches):
                y = float(b.inverse(y))
            diffs.append(abs(y - x))
            x = y
            if diffs[-1] == 0.0:
                break
        tail = [d for d in diffs if d > 1e-14]
        ratios = [b / a for a, b in zip(tail, tail[1:])]
        assert all(r < 0.9 for r in ratios[1:])
        # the expanding iterate bounds the asymptotic rate: one round of
        # length 2 contracts by at least the declared factor 4
        assert ratios[-1] <= 0.25 + 0.05

    def test_word_validation(self, gauss):
        with pytest.raises(ConfigError):
            periodic_point(gauss, ())
        with pytest.raises(ConfigError):
            periodic_point(gauss, (0, 1))

    def test_non_contracting_system_detected(self):
        cfg = {"system": {"branch": [
            {"lo": 0.0, "hi": 0.5, "slope": 0.5},
            {"lo": 0.5, "hi": 1.0, "slope": 0.5},
        ]}}
        slow = system_from_config(cfg, strict=True)
        with pytest.raises(NonContractionError):
            periodic_point(slow, (1,))

    def test_residual_invariant_enforced(self):
        with pytest.raises(ConfigError):
            PeriodicOrbit((1,), 0.5, 1.0, 1e-6)


class TestCertificateSearch:
    def test_tangent_finds_printed_pair(self, tangent):
        cert = certificate_search(tangent, 3, 3, 1e-6)
        assert cert is not None and cert.valid
        words = {cert.orbit_a.word, cert.orbit_b.word}
        assert words == {(1, 2, 3), (1, 3, 2)}
        derivs = sorted(
            math.exp(o.cycle_log_derivative)
            for o in (cert.orbit_a, cert.orbit_b)
        )
        assert derivs[0] == pytest.approx(72.012, abs=0.01)
        assert derivs[1] == pytest.approx(72.036, abs=0.01)
        assert cert.derivative_gap == pytest.approx(3.3168e-4, rel=1e-3)
        assert cert.derivative_gap > cert.error_bound

    def test_luroth_affine_nullity(self, luroth):
        assert certificate_search(luroth, 3, 4, 1e-6) is None

    def test_gauss_length3_reversal_blocked(self, gauss):
        # every length-3 multiset class pairs words that reverse each other,
        # and reversal preserves the cycle derivative here, so no certificate
        assert certificate_search(gauss, 3, 3, 1e-6) is None
        a = periodic_point(gauss, (1, 2, 3)).cycle_log_derivative
        b = periodic_point(gauss, (1, 3, 2)).cycle_log_derivative
        assert abs(a - b) <= 1e-10

    def test_gauss_length4_succeeds(self, gauss):
        cert = certificate_search(gauss, 3, 4, 1e-6)
        assert cert is not None and cert.valid
        assert sorted(cert.orbit_a.word) == sorted(cert.orbit_b.word)
        assert cert.derivative_gap == pytest.approx(0.211903791537, abs=1e-9)

    def test_errors(self, gauss):
        with pytest.raises(BudgetError):
            certificate_search(gauss, 10, 7, 1e-6)
        with pytest.raises(ConfigError):
            certificate_search(gauss, 0, 3, 1e-6)
        with pytest.raises(ConfigError):
            certificate_search(gauss, 2, 0, 1e-6)

    def test_certificate_invariants_enforced(self, tangent):
        a = periodic_point(tangent, (3, 2, 1))
        b = periodic_point(tangent, (3, 1, 2))
        gap = abs(a.cycle_log_derivative - b.cycle_log_derivative)
        with pytest.raises(ConfigError):
            GapCertificate(a, b, gap, 1e-12, valid=False)  # flag contradicts gap
        c = periodic_point(tangent, (1,))
        with pytest.raises(ConfigError):
            GapCertificate(a, c, gap, 1e-12, valid=True)   # different multiset

    def test_renderings(self, tangent):
        cert = certificate_search(tangent, 3, 3, 1e-6)
        text = certificate_to_text(cert)
        assert "72.03" in text and "72.01" in text and "valid: True" in text
        blob = json.loads(certificate_to_json(cert))
        assert blob["found"] and blob["valid"]
        assert blob["orbit_a"]["word"] == [1, 2, 3]
        assert blob["gap"] == cert.derivative_gap
        none_blob = json.loads(certificate_to_json(None))
        assert none_blob == {"found": False, "valid": False}
        assert "no certificate" in certificate_to_text(None)


class TestGaussMeasure:
    def test_closed_forms(self):
        assert gauss_cylinder_measure((1,)) == pytest.approx(
            math.log(4 / 3) / math.log(2), abs=1e-15)
        assert gauss_cylinder_measure((2,)) == pytest.approx(
            math.log(9 / 8) / math.log(2), abs=1e-15)
        assert gauss_cylinder_measure((1, 2)) == pytest.approx(
            math.log(21 / 20) / math.log(2), abs=1e-15)

    def test_rejects_empty(self):
        with pytest.raises(ConfigError):
            gauss_cylinder_measure(())

    def test_normalization_with_tail(self):
        N = 10**4
        total = math.fsum(gauss_cylinder_measure((n,)) for n in range(1, N + 1))
        tail = math.log(1.0 + 1.0 / (N + 1)) / math.log(2)
        assert total + tail == pytest.approx(1.0, abs=1e-4)
        assert total < 1.0

    def test_reversal_symmetry(self):
        for n in range(1, 6):
            for m in range(1, 6):
                for k in range(1, 6):
                    w = (n, m, k)
                    assert abs(gauss_cylinder_measure(w)
                               - gauss_cylinder_measure(w[::-1])) <= 1e-12
        assert abs(gauss_cylinder_measure((1, 2))
                   - gauss_cylinder_measure((2, 1))) <= 1e-12

    def test_long_word_falls_back_to_floats(self):
        val = gauss_cylinder_measure((1,) * 14)
        assert 0.0 < val < 1e-3


class TestFactorization:
    def test_gauss_measure_is_not_bernoulli(self):
        rep = bernoulli_factorization_test(gauss_cylinder_measure, [(1, 2)], 1e-5)
        e = rep.entries[0]
        assert e.witness and not rep.bernoulli_consistent
        assert e.joint == pytest.approx(0.070389, abs=1e-6)
        assert e.product == pytest.approx(0.415037 * 0.169925, abs=1e-6)
        assert e.deviation == pytest.approx(1.3591977217e-4, abs=1e-10)
        assert e.reversal_gap <= 1e-12

    def test_bernoulli_pushforward_passes(self):
        p = (0.7, 0.3)

        def measure(w):
            return math.prod(p[a - 1] for a in w)

        rep = bernoulli_factorization_test(measure, [(1, 2), (2, 1), (1, 1)], 1e-12)
        assert rep.bernoulli_consistent
        assert isinstance(rep, FactorizationReport)
        assert rep.witnesses == ()

    def test_tolerance_validation(self):
        with pytest.raises(ConfigError):
            bernoulli_factorization_test(gauss_cylinder_measure, [(1, 2)], -1.0)
