import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from expconv import compound_poisson as cp, sampler
from expconv.density import DensitySpec, l1_norm, sphere_area, density_f


class TestRadius:
    def test_exponential_mean(self):
        r = sampler.sample_radius(DensitySpec(1, 1.0, 0.0), np.random.default_rng(1), 10**6)
        assert abs(r.mean() - 1.0) < 3 * 1.0 / math.sqrt(r.size)

    def test_gamma_mean(self):
        r = sampler.sample_radius(DensitySpec(3, 2.0, 1.0), np.random.default_rng(2), 10**6)
        sd = math.sqrt(2.0) / 2.0 / math.sqrt(r.size)
        assert abs(r.mean() - 1.0) < 3 * sd

    def test_scalar_draw(self):
        assert isinstance(sampler.sample_radius(DensitySpec(2, 1.0, 0.5), np.random.default_rng(0)), float)

    def test_cutoff_piece_weights(self):
        spec = DensitySpec(1, 1.0, 2.0, "cutoff")
        radial = lambda r: sphere_area(1) * float(density_f(spec, r))  # noqa: E731
        inner = integrate.quad(radial, 0, 1, epsabs=0, epsrel=1e-13)[0]
        outer = integrate.quad(radial, 1, np.inf, epsabs=0, epsrel=1e-13)[0]
        w_in, w_out = sampler.cutoff_piece_weights(spec)
        assert w_in == pytest.approx(inner / (inner + outer), abs=1e-10)
        assert w_out == pytest.approx(outer / (inner + outer), abs=1e-10)

    @pytest.mark.parametrize("spec", [DensitySpec(1, 1.0, 2.0, "cutoff"), DensitySpec(2, 0.5, 1.5, "cutoff"),
                                      DensitySpec(3, 1.0, 1.0, "cutoff")])
    def test_cutoff_distribution(self, spec):
        r = sampler.sample_radius(spec, np.random.default_rng(7), 50_000)

        def cdf(x):
            radial = lambda s: s ** (spec.d - 1) * float(density_f(spec, s))  # noqa: E731
            return np.array([integrate.quad(radial, 0, min(v, 1.0))[0]
                             + (integrate.quad(radial, 1.0, v)[0] if v > 1 else 0.0) for v in x])
        grid = np.linspace(1e-3, 40, 400)
        table = cdf(grid)
        table /= l1_norm(spec) / sphere_area(spec.d)
        ks = sampler.ks_against(r, lambda x: np.interp(x, grid, table))
        assert ks.passed


class TestDirections:
    @given(st.integers(1, 5))
    def test_unit_norm(self, d):
        u = sampler.sample_directions(d, 100, np.random.default_rng(d))
        assert np.allclose(np.linalg.norm(u, axis=1), 1.0)


class TestCompound:
    spec = DensitySpec(1, 1.0, 0.0)

    def test_tiny_lambda_is_all_atom(self):
        b = sampler.sample_compound_poisson(self.spec, 1e-6, 10_000, 3)
        assert b.atom_count / b.count > 0.999

    def test_reproducible(self):
        a = sampler.sample_compound_poisson(self.spec, 1.0, 70_000, 11)
        b = sampler.sample_compound_poisson(self.spec, 1.0, 70_000, 11)
        assert np.array_equal(a.points, b.points) and a.atom_count == b.atom_count

    def test_thread_count_invariant(self):
        a = sampler.sample_compound_poisson(self.spec, 1.0, 140_000, 5, threads=1)
        b = sampler.sample_compound_poisson(self.spec, 1.0, 140_000, 5, threads=3)
        assert np.array_equal(a.points, b.points)

    def test_atom_fraction(self):
        b = sampler.sample_compound_poisson(DensitySpec(2, 1.0, 0.5), 0.2, 100_000, 9)
        assert sampler.atom_check(b)[2]

    def test_histogram_matches_density(self):
        lam = 1.0
        b = sampler.sample_compound_poisson(self.spec, lam, 10**6, 2024)
        table = cp.p_lambda_table(self.spec, lam)
        edges = np.linspace(0.5, 3.0, 11)
        counts, _ = np.histogram(b.radii[b.radii > 0], bins=edges)
        probs = np.diff(table.radial_cdf(edges)) * (1 - table.atom)
        expected = probs * b.count
        sd = np.sqrt(b.count * probs * (1 - probs))
        assert np.all(expected >= 100)
        assert np.all(np.abs(counts - expected) <= 4 * sd)

    def test_rejects_bad_lambda(self):
        with pytest.raises(ValueError):
            sampler.sample_compound_poisson(self.spec, 0.0, 10, 1)

    def test_csv_header(self):
        b = sampler.sample_compound_poisson(DensitySpec(2, 1.0, 0.0), 1.0, 5, 1)
        lines = b.to_csv().splitlines()
        assert lines[0].startswith("# d=2,") and "seed=1" in lines[0] and "atom_count=" in lines[0]
        assert lines[1] == "x_1,x_2" and len(lines) == 7


class TestKS:
    def test_uniform_sample_passes(self):
        u = np.random.default_rng(0).random(20_000)
        assert sampler.ks_against(u, lambda x: x).passed

    def test_shifted_sample_fails(self):
        u = np.random.default_rng(0).random(20_000) ** 0.9
        assert not sampler.ks_against(u, lambda x: x).passed
