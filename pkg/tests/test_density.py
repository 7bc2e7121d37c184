import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from expconv.density import (DensitySpec, Variant, compute_constants, density_f, l1_norm, l1_norm_quadrature,
                             profile_g, sphere_area, verify_assumptions)


def specs():
    @st.composite
    def build(draw):
        d = draw(st.integers(1, 3))
        m = draw(st.floats(0.25, 3.0))
        variant = draw(st.sampled_from([Variant.PURE, Variant.CUTOFF]))
        hi = d - 0.05 if variant is Variant.PURE else 3.0
        gamma = draw(st.floats(0.0, hi))
        return DensitySpec(d, m, gamma, variant)
    return build()


class TestSpec:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            DensitySpec(0, 1.0, 0.0)
        with pytest.raises(ValueError):
            DensitySpec(1, 0.0, 0.0)
        with pytest.raises(ValueError):
            DensitySpec(1, 1.0, -0.1)
        with pytest.raises(ValueError):
            DensitySpec(2, 1.0, 2.0, Variant.PURE)

    def test_cutoff_allows_large_gamma(self):
        assert DensitySpec(1, 1.0, 2.0, Variant.CUTOFF).gamma == 2.0

    def test_main_range(self):
        assert DensitySpec(2, 1.0, 1.0).in_main_range
        assert not DensitySpec(1, 1.0, 2.0, "cutoff").in_main_range


class TestProfile:
    def test_pure_power(self):
        assert profile_g(DensitySpec(1, 1.0, 0.5), 4.0) == pytest.approx(0.5, rel=1e-15)

    def test_cutoff_flat_inside_unit_ball(self):
        assert profile_g(DensitySpec(1, 1.0, 2.0, "cutoff"), 0.3) == 1.0

    def test_singular_origin_is_infinite(self):
        assert math.isinf(profile_g(DensitySpec(2, 1.0, 1.0), 0.0))
        assert DensitySpec(2, 1.0, 1.0).singular


class TestDensity:
    def test_values(self):
        assert density_f(DensitySpec(1, 1.0, 0.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
        assert density_f(DensitySpec(1, 1.0, 0.0), 0.0) == 1.0
        assert density_f(DensitySpec(2, 2.0, 0.5), 4.0) == pytest.approx(0.5 * math.exp(-8), rel=1e-14)

    @given(specs(), st.floats(1e-3, 50), st.floats(1e-3, 50))
    def test_radially_decreasing(self, spec, r1, r2):
        lo, hi = sorted((r1, r2))
        assert density_f(spec, hi) <= density_f(spec, lo)


class TestL1Norm:
    def test_closed_forms(self):
        assert l1_norm(DensitySpec(1, 1.0, 0.0)) == pytest.approx(2.0, rel=1e-14)
        assert l1_norm(DensitySpec(1, 1.0, 0.5)) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)
        assert l1_norm(DensitySpec(2, 1.0, 0.0)) == pytest.approx(2 * math.pi, rel=1e-12)

    @pytest.mark.parametrize("spec", [DensitySpec(1, 1.0, 0.5), DensitySpec(2, 1.0, 0.0),
                                      DensitySpec(3, 0.5, 1.5, "cutoff"), DensitySpec(2, 0.7, 1.2)])
    def test_matches_independent_quadrature(self, spec):
        def radial(r):
            return sphere_area(spec.d) * r ** (spec.d - 1) * float(density_f(spec, r))
        ref = sum(integrate.quad(radial, a, b, limit=200, epsrel=1e-12)[0]
                  for a, b in ((0, 1), (1, 10), (10, np.inf)))
        assert l1_norm(spec) == pytest.approx(ref, rel=1e-8)
        assert l1_norm_quadrature(spec) == pytest.approx(ref, rel=1e-8)


class TestConstants:
    def test_d1_values(self):
        c = compute_constants(DensitySpec(1, 1.0, 0.0))
        assert c.M1 == pytest.approx(math.exp(-1), rel=1e-14)
        assert c.M2 == pytest.approx(2 * math.e, rel=1e-14)
        assert c.C1 == c.C2 == pytest.approx(math.e)

    def test_threshold_radius(self):
        c = compute_constants(DensitySpec(2, 1.0, 1.0))
        assert c.r0 == pytest.approx(32 * math.exp(2 / math.e), rel=1e-12)
        assert c.r0 == pytest.approx(66.78, abs=0.01)

    @given(specs())
    def test_bundle_invariants(self, spec):
        c = compute_constants(spec)
        assert c.C1 >= 1 and c.C3 >= 1
        assert c.M1 > 0 and c.M2 > 0
        assert c.M3 >= 1 and 0 < c.M4 <= 1
        if spec.in_main_range:
            assert c.rho2 == pytest.approx((spec.d + 1) / 2 - spec.gamma)
            assert c.r0 > 1
        else:
            assert math.isnan(c.rho2)

    @given(specs(), st.floats(1.0, 40.0), st.floats(0.0, 1.0))
    def test_c1_certificate(self, spec, r, t):
        c = compute_constants(spec)
        assert density_f(spec, r) <= c.C1 * density_f(spec, r + t) * (1 + 1e-12)


class TestAssumptions:
    @pytest.mark.parametrize("spec", [DensitySpec(1, 1.0, 0.0), DensitySpec(3, 0.5, 1.5)])
    def test_grid_passes(self, spec):
        recs = verify_assumptions(spec, np.linspace(0.1, 10, 60))
        assert recs and all(r.passed for r in recs)

    def test_single_point_grid_vacuous(self):
        recs = verify_assumptions(DensitySpec(1, 1.0, 0.0), [2.0])
        assert all(r.passed for r in recs)
