import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from expconv.special import (beta, beta_quotient_threshold, hypergeom_2f1, inc_beta, log_gamma, wright_envelope,
                             wright_leading_log, wright_phi, wright_switch)


class TestGammaBeta:
    def test_log_gamma(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
        assert log_gamma(10.0) == pytest.approx(math.log(362880), rel=1e-15)
        with pytest.raises(ValueError):
            log_gamma(0.0)

    def test_beta(self):
        assert beta(1, 1) == pytest.approx(1.0)
        assert beta(2, 3) == pytest.approx(1 / 12, rel=1e-14)
        assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)

    def test_inc_beta(self):
        assert inc_beta(0.5, 1, 1) == pytest.approx(0.5, rel=1e-15)
        assert inc_beta(1.0, 2, 3) == pytest.approx(1 / 12, rel=1e-14)
        ref, _ = integrate.quad(lambda t: t**0.5 * (1 - t) ** 1.5, 0, 0.1, epsabs=0, epsrel=1e-13)
        assert inc_beta(0.1, 1.5, 2.5) == pytest.approx(ref, rel=1e-10)

    @given(st.floats(0.05, 0.95), st.floats(0.1, 5), st.floats(0.1, 5))
    def test_inc_beta_below_complete(self, x, a, b):
        assert 0 < inc_beta(x, a, b) <= beta(a, b) * (1 + 1e-14)


class TestHypergeometric:
    def test_zero_argument(self):
        val, tail = hypergeom_2f1(2.5, 1, 3.5, 0.0)
        assert val == 1.0 and tail == 0.0

    @given(st.floats(0.1, 4), st.floats(0.1, 4), st.floats(0.2, 5), st.floats(0, 0.9))
    def test_against_mpmath(self, a, b, c, x):
        val, tail = hypergeom_2f1(a, b, c, x)
        ref = float(mp.hyp2f1(a, b, c, x))
        assert val == pytest.approx(ref, rel=1e-12)

    def test_incomplete_beta_identity(self):
        # B_x(a, b) = x^a / a * 2F1(a, 1 - b; a + 1; x)
        a, b, x = 1.5, 2.5, 0.3
        val, _ = hypergeom_2f1(a, 1 - b, a + 1, x)
        assert x**a / a * val == pytest.approx(inc_beta(x, a, b), rel=1e-13)


class TestWright:
    def test_reference_value(self):
        ref = mp.nsum(lambda n: 1 / (mp.factorial(n - 1) * mp.factorial(n)), [1, mp.inf])
        w = wright_phi(1.0, 0.0, 1.0)
        assert w.value == pytest.approx(float(ref), rel=1e-14)
        assert abs(w.value - 1.5906368) < 1e-6

    def test_zero_argument(self):
        assert wright_phi(0.7, 0.0, 0.0).value == 0.0
        assert wright_phi(0.7, 1.0, 0.0).value == 1.0

    @pytest.mark.parametrize("rho,beta_,t", [(0.5, 0.0, 30.0), (1.0, 1.0, 50.0), (2.0, 0.0, 80.0)])
    def test_series_against_mpmath(self, rho, beta_, t):
        mp.mp.dps = 40
        ref = mp.nsum(lambda n: mp.mpf(t) ** n * mp.rgamma(rho * n + beta_) / mp.factorial(n), [0, mp.inf])
        mp.mp.dps = 15
        assert wright_phi(rho, beta_, t, "series").log_value == pytest.approx(float(mp.log(ref)), rel=1e-12)

    def test_regime_agreement_moderate_t(self):
        for rho in (0.5, 1.0, 2.0):
            s = wright_phi(rho, 0.0, 400.0, "series").log_value
            a = wright_phi(rho, 0.0, 400.0, "asymptotic").log_value
            assert abs(math.expm1(a - s)) < 0.05

    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
    def test_saddle_point_beats_leading_form(self, rho):
        for t in (1e3, 1e5):
            s = wright_phi(rho, 0.0, t, "series").log_value
            w = wright_phi(rho, 0.0, t, "asymptotic")
            lead = wright_leading_log(rho, 0.0, t)[0]
            assert abs(w.log_value - s) <= w.rel_err
            assert abs(w.log_value - s) < 0.1 * abs(lead - s)

    def test_leading_form_error_scale(self):
        t = 1e6
        s = wright_phi(1.0, 0.0, t, "series").log_value
        lv, scale = wright_leading_log(1.0, 0.0, t)
        assert abs(lv - s) <= scale

    def test_asymptotic_rejects_tiny_t(self):
        with pytest.raises(ValueError):
            wright_phi(1.0, 1.0, 1e-3, "asymptotic")

    def test_switch_grows_with_rho(self):
        assert wright_switch(0.5) > 0 and wright_switch(2.0) > 0

    @given(st.floats(0.3, 2.5), st.floats(0.5, 1e4), st.floats(1.01, 3.0))
    def test_monotone_in_t(self, rho, t, k):
        assert wright_phi(rho, 0.0, t * k).log_value > wright_phi(rho, 0.0, t).log_value

    def test_envelope_brackets_one_sided(self):
        lo, hi = wright_envelope(1.0, 0.0)
        assert 0 < lo <= hi


class TestBetaQuotient:
    def test_threshold_values(self):
        assert beta_quotient_threshold(1, 1) == pytest.approx(32 * math.exp(2 / math.e), rel=1e-14)
        assert beta_quotient_threshold(1, 0.5) == pytest.approx(8.0, rel=1e-15)

    def test_rejects_bad_a0(self):
        with pytest.raises(ValueError):
            beta_quotient_threshold(1.5, 1.0)

    @given(st.sampled_from([0.25, 0.5, 1.0]), st.floats(0.3, 4.0), st.floats(1.0, 6.0), st.floats(0.0, 2.0))
    def test_quotient_inequality(self, a0, b, k, logr):
        r = beta_quotient_threshold(a0, b) * 10**logr
        a = a0 * k
        assert 2 * inc_beta(1 / r, a, b) <= beta(a, b)
