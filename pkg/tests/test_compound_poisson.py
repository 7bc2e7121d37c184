import math

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from expconv import compound_poisson as cp, oracle
from expconv.density import DensitySpec, compute_constants, density_f

LAPLACE = DensitySpec(1, 1.0, 0.0)


def laplace_power(n, x):
    """n-fold self-convolution of e^{-|x|} on the line, x >= 0 (mpmath)."""
    x = mp.mpf(x)
    s = mp.fsum(mp.factorial(n - 1 + k) / (mp.factorial(k) * mp.factorial(n - 1 - k) * 2**k) * x ** (n - 1 - k)
                for k in range(n))
    return mp.exp(-x) * s / mp.factorial(n - 1)


class TestLaplaceReference:
    def test_closed_form_by_symbolic_convolution(self):
        x, y = sp.symbols("x y", positive=True)
        f = lambda z: sp.exp(-z)  # noqa: E731  (argument already |.|)
        prev = f(x)
        for n in (2, 3):
            p = lambda z: prev.subs(x, z)  # noqa: E731
            conv = (sp.integrate(p(x - y) * f(y), (y, 0, x))
                    + sp.integrate(p(x + y) * f(y), (y, 0, sp.oo))
                    + sp.integrate(p(y - x) * f(y), (y, x, sp.oo)))
            conv = sp.simplify(conv)
            for xv in (0.5, 2, 7):
                assert float(conv.subs(x, xv)) == pytest.approx(float(laplace_power(n, xv)), rel=1e-13)
            prev = conv

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_oracle_powers(self, n):
        xs = np.array([0.5, 2.0, 10.0, 40.0])
        got = oracle.fnstar_points(LAPLACE, n, xs)
        want = [float(laplace_power(n, x)) for x in xs]
        assert np.allclose(got, want, rtol=1e-8)


class TestPLambda:
    def test_against_high_precision_series(self):
        mp.mp.dps = 30
        ref = mp.exp(-2) * mp.fsum(laplace_power(n, 2) / mp.factorial(n) for n in range(1, 201))
        mp.mp.dps = 15
        res = cp.p_lambda(LAPLACE, 1.0, 2.0)
        assert res.value == pytest.approx(float(ref), rel=1e-8)
        assert res.accepted and res.n_terms < 60

    def test_leading_terms_dominate(self):
        first = math.exp(-2) * (math.exp(-2) + 0.5 * 3 * math.exp(-2))
        assert cp.p_lambda(LAPLACE, 1.0, 2.0).value > first

    def test_small_lambda_single_term(self):
        lam = 1e-8
        for spec, x in ((LAPLACE, 2.0), (DensitySpec(2, 1.0, 0.75), 3.0)):
            res = cp.p_lambda(spec, lam, x)
            norm = compute_constants(spec).l1_norm
            assert res.value / (lam * math.exp(-lam * norm) * density_f(spec, x)) == pytest.approx(1, abs=1e-6)

    def test_decreasing_in_x(self):
        xs = [0.5, 1, 2, 5, 10, 20, 40]
        vals = [r.value for r in cp.p_lambda(LAPLACE, 1.0, xs)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            cp.p_lambda(LAPLACE, 0.0, 1.0)
        with pytest.raises(ValueError):
            cp.p_lambda(LAPLACE, 1.0, 1e4)

    def test_cap_raises(self):
        with pytest.raises(cp.SeriesNotConverged):
            cp.p_lambda(LAPLACE, 4.0, 2.0, n_max=3)

    def test_majorant_is_an_upper_bound(self):
        c = compute_constants(LAPLACE)
        res = cp.p_lambda(LAPLACE, 1.0, 5.0, tol=1e-12)
        short = cp.p_lambda(LAPLACE, 1.0, 5.0, tol=1e-3)
        assert res.value - short.value <= cp.majorant_tail(LAPLACE, c, 1.0, 5.0, short.n_terms)

    @pytest.mark.parametrize("spec,lam", [(LAPLACE, 1.0), (DensitySpec(2, 1.0, 0.75), 0.25)])
    def test_total_mass(self, spec, lam):
        t = cp.p_lambda_table(spec, lam)
        assert t.mass() + t.atom == pytest.approx(1.0, abs=1e-5)

    def test_radial_cdf_limits(self):
        t = cp.p_lambda_table(LAPLACE, 1.0)
        assert t.radial_cdf(0.0) == 0.0
        assert t.radial_cdf(400.0) == pytest.approx(1.0, abs=1e-5)
        r = np.linspace(0.1, 30, 50)
        assert np.all(np.diff(t.radial_cdf(r)) >= 0)


class TestNStarBounds:
    def test_line_pair(self):
        lo, hi = cp.nstar_bounds(LAPLACE, None, 2, 10.0)
        assert lo == pytest.approx(10 * math.exp(-10), rel=1e-14)
        assert lo <= 11 * math.exp(-10) <= hi

    def test_first_power(self):
        spec = DensitySpec(2, 1.0, 0.5)
        lo, hi = cp.nstar_bounds(spec, None, 1, 3.0)
        assert lo <= density_f(spec, 3.0) <= hi

    def test_plane_pair(self):
        spec = DensitySpec(2, 1.0, 0.5)
        lo, hi = cp.nstar_bounds(spec, None, 2, 20.0)
        assert lo <= oracle.fnstar(spec, 2, 20.0) <= hi

    def test_rejects_small_x(self):
        with pytest.raises(ValueError):
            cp.nstar_bounds(LAPLACE, None, 2, 0.5)

    def test_rejects_dsp_range(self):
        with pytest.raises(ValueError):
            cp.nstar_bounds(DensitySpec(1, 1.0, 2.0, "cutoff"), None, 2, 5.0)


class TestWrightSandwich:
    def test_line(self):
        lo, hi = cp.p_lambda_bounds_wright(LAPLACE, None, 1.0, 5.0)
        assert lo <= cp.p_lambda(LAPLACE, 1.0, 5.0).value <= hi

    def test_plane(self):
        spec = DensitySpec(2, 1.0, 0.0)
        llo, lhi = cp.p_lambda_bounds_wright_log(spec, None, 2.0, 30.0)
        v = math.log(cp.p_lambda(spec, 2.0, 30.0).value)
        assert llo <= v <= lhi

    def test_one_term_ratio(self):
        c = compute_constants(LAPLACE)
        lam, x = 1e-9, 1.0
        lo, hi = cp.p_lambda_bounds_wright(LAPLACE, c, lam, x)
        assert hi / lo == pytest.approx(math.exp(c.M2 * lam), rel=1e-6)


class TestRegimes:
    def test_threshold(self):
        assert cp.p_lambda_bounds_regimes(LAPLACE, None, 0.5, 1.0)[0] == "small"
        assert cp.p_lambda_bounds_regimes(LAPLACE, None, 1.0, 100.0)[0] == "large"

    def test_large_regime_brackets(self):
        regime, lo, hi = cp.p_lambda_bounds_regimes(LAPLACE, None, 1.0, 100.0)
        assert lo <= cp.p_lambda(LAPLACE, 1.0, 100.0).value <= hi

    def test_boundary_continuity(self):
        v = cp.p_lambda(LAPLACE, 0.5, 2.0).value
        for x in (2.0 - 1e-9, 2.0, 2.0 + 1e-9):
            _, lo, hi = cp.p_lambda_bounds_regimes(LAPLACE, None, 0.5, x)
            assert lo <= v * (1 + 1e-6) and v <= hi * (1 + 1e-6)

    def test_constants_recorded(self):
        e = cp.regime_constants(LAPLACE)
        assert e.E1 == 1.0 and 0 < e.E3 <= e.E5


class TestSmallX:
    def test_line(self):
        lo, hi = cp.p_lambda_small_x_bounds(LAPLACE, None, 1.0, 0.5)
        assert lo == pytest.approx(math.exp(-2) * math.exp(-0.5), rel=1e-14)
        assert lo <= cp.p_lambda(LAPLACE, 1.0, 0.5).value <= hi

    @given(st.floats(0.01, 0.99))
    def test_pinch(self, x):
        spec = DensitySpec(2, 1.0, 1.0)
        lo, hi = cp.p_lambda_small_x_bounds(spec, None, 1e-8, x)
        lf = 1e-8 * density_f(spec, x)
        assert lo == pytest.approx(lf, rel=1e-6) and hi == pytest.approx(lf, rel=1e-6)

    def test_finite_near_singular_origin(self):
        lo, hi = cp.p_lambda_small_x_bounds(DensitySpec(2, 1.0, 1.0), None, 1.0, 0.1)
        assert math.isfinite(lo) and math.isfinite(hi)

    def test_rejects_large_x(self):
        with pytest.raises(ValueError):
            cp.p_lambda_small_x_bounds(LAPLACE, None, 1.0, 1.0)


class TestSeriesBounds:
    def test_hg_series_bracket(self):
        c = compute_constants(LAPLACE)
        lo, hi = cp.series_bounds_hg(LAPLACE, c, 1.0, 10.0)
        assert lo <= cp.p_lambda(LAPLACE, 1.0, 10.0).value <= hi
