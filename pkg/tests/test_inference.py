"""Variance fields, band geometry, variance targets, sup statistics."""

import math

import numpy as np
import pytest

from margint import (AdditiveBand, BandCurve, BandwidthPlan, ComponentCurve,
                     Sample, additive_band, band_halfwidth,
                     bump_integration_density, component_band, epanechnikov,
                     kde_fit, nuisance_bandwidth, product_kernel,
                     sigma_oracle, theorem_statistic, variance_field)
from margint.marginal import AdditiveFit

from conftest import random_sample


def make_plan(d, h, ell=0.4, n=100):
    return BandwidthPlan(h_axes=np.full(d, h), ell=ell, h_single=h, n=n)


def fitted_density(sample, ell=0.4, floor=0.05):
    return kde_fit(sample, product_kernel(epanechnikov(), sample.d), ell=ell,
                   floor=floor)


class TestVarianceField:
    def test_zero_responses_give_zero_variance(self, tiny_sample):
        zeroed = Sample(x=tiny_sample.x, y=np.zeros(tiny_sample.n))
        plan = make_plan(2, 0.3, n=zeroed.n)
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        sigma_sq, diag = variance_field(zeroed, fitted_density(zeroed),
                                        product_kernel(epanechnikov(), 2),
                                        plan, q, np.linspace(0.2, 0.8, 9))
        assert np.all(sigma_sq == 0.0)
        assert diag["clipped_negative"] == 0

    def test_zero_far_from_data_along_target_axis(self, tiny_sample):
        plan = make_plan(2, 0.1, n=tiny_sample.n)
        q = bump_integration_density(((0.05, 0.95), (0.15, 0.85)), k=2)
        grid = np.array([0.06, 0.08])  # > h away from every first coordinate
        sigma_sq, _ = variance_field(tiny_sample, fitted_density(tiny_sample),
                                     product_kernel(epanechnikov(), 2), plan,
                                     q, grid)
        assert np.all(sigma_sq == 0.0)

    def test_matches_riemann_oracle(self, tiny_sample):
        plan = make_plan(2, 0.3, n=tiny_sample.n)
        kernels = product_kernel(epanechnikov(), 2)
        density = fitted_density(tiny_sample)
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        grid = np.linspace(0.3, 0.7, 5)
        sigma_sq, _ = variance_field(tiny_sample, density, kernels, plan, q,
                                     grid)

        k1, k2 = kernels.factors
        h1, h2 = plan.h_axes
        lo, hi = q.axes[1].support
        m = 8000
        v = lo + (np.arange(m) + 0.5) * (hi - lo) / m
        dv = (hi - lo) / m
        want = np.empty_like(grid)
        for a, x1 in enumerate(grid):
            total = 0.0
            for i in range(tiny_sample.n):
                inner = (k2.evaluate((v - tiny_sample.x[i, 1]) / h2) / h2
                         * q.q_axis(1, v) ** 2
                         / density.clamped(
                             np.stack([np.full(m, x1), v], axis=1)) ** 2)
                total += (tiny_sample.y[i] ** 2
                          * k1.evaluate((x1 - tiny_sample.x[i, 0]) / h1)
                          * inner.sum() * dv)
            want[a] = total / (tiny_sample.n * h1)
        assert np.allclose(sigma_sq, want, rtol=1e-4, atol=1e-10)

    def test_wider_nuisance_bandwidth_accepted(self, rng):
        sample = random_sample(rng, 60, 2)
        plan = make_plan(2, 0.2, n=sample.n)
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        grid = np.linspace(0.2, 0.8, 9)
        wide, _ = variance_field(sample, fitted_density(sample),
                                 product_kernel(epanechnikov(), 2), plan, q,
                                 grid, x_bandwidth=0.5)
        assert np.all(np.isfinite(wide))
        with pytest.raises(ValueError):
            variance_field(sample, fitted_density(sample),
                           product_kernel(epanechnikov(), 2), plan, q, grid,
                           x_bandwidth=0.0)

    def test_floorless_density_rejected(self, tiny_sample):
        plan = make_plan(2, 0.3, n=tiny_sample.n)
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        with pytest.raises(ValueError, match="floor"):
            variance_field(tiny_sample, fitted_density(tiny_sample, floor=0.0),
                           product_kernel(epanechnikov(), 2), plan, q,
                           np.linspace(0.2, 0.8, 5))

    def test_nuisance_bandwidth_rule(self):
        assert nuisance_bandwidth(100, 0.5) == 0.5
        n = 8000
        assert nuisance_bandwidth(n, 0.01) == pytest.approx(
            0.8 * n ** (-0.3))
        assert nuisance_bandwidth(n, 0.01) > nuisance_bandwidth(8 * n, 0.01)


class TestBandHalfwidth:
    def test_fixed_input_formula(self):
        plan = make_plan(2, 0.1, n=1000)
        hw = band_halfwidth(np.array([0.5]), plan, epanechnikov(), 1000)
        want = math.sqrt(2.0 * math.log(10.0) / (1000 * 0.1) * 0.5 * 0.6)
        assert hw[0] == pytest.approx(want, rel=1e-12)

    def test_zero_variance_gives_zero_width(self):
        plan = make_plan(2, 0.1)
        assert np.all(band_halfwidth(np.zeros(4), plan, epanechnikov(),
                                     500) == 0.0)

    def test_quadrupling_n_halves_width(self):
        plan = make_plan(2, 0.1)
        s = np.array([0.3, 0.7])
        hw1 = band_halfwidth(s, plan, epanechnikov(), 500)
        hw2 = band_halfwidth(s, plan, epanechnikov(), 2000)
        assert np.allclose(hw1, 2.0 * hw2, rtol=1e-14)

    def test_large_bandwidth_rejected(self):
        plan = make_plan(2, 1.2)
        with pytest.raises(ValueError):
            band_halfwidth(np.array([0.5]), plan, epanechnikov(), 500)

    def test_negative_variance_rejected(self):
        plan = make_plan(2, 0.1)
        with pytest.raises(ValueError):
            band_halfwidth(np.array([-0.1]), plan, epanechnikov(), 500)


class TestBandCurve:
    def _band(self, eps=1.0):
        return BandCurve(grid=np.array([0.0, 1.0]),
                         center=np.array([1.0, 2.0]),
                         halfwidth=np.array([0.5, 0.25]),
                         epsilon_factor=eps)

    def test_envelopes(self):
        band = self._band()
        assert np.allclose(band.lower, [0.5, 1.75])
        assert np.allclose(band.upper, [1.5, 2.25])

    def test_zero_factor_degenerates_to_center(self):
        band = self._band(eps=0.0)
        assert np.array_equal(band.lower, band.center)
        assert np.array_equal(band.upper, band.center)

    def test_containment_monotone_in_factor(self):
        truth = np.array([1.3, 2.1])
        assert not self._band(0.2).contains(truth)
        assert self._band(1.0).contains(truth)
        assert self._band(1.5).contains(truth)

    def test_nesting(self):
        eps = 0.5
        narrow, mid, wide = (self._band(f) for f in (1 - eps, 1.0, 1 + eps))
        assert np.all(narrow.lower >= mid.lower) and np.all(mid.lower >= wide.lower)
        assert np.all(narrow.upper <= mid.upper) and np.all(mid.upper <= wide.upper)

    def test_negative_halfwidth_rejected(self):
        with pytest.raises(ValueError):
            BandCurve(grid=np.array([0.0]), center=np.array([0.0]),
                      halfwidth=np.array([-0.1]))

    def test_component_band_alignment(self):
        curve = ComponentCurve(axis=0, grid=np.array([0.0, 1.0]),
                               values=np.array([1.0, 2.0]))
        band = component_band(curve, np.array([0.1, 0.1]), 1.5)
        assert band.epsilon_factor == 1.5
        with pytest.raises(ValueError):
            component_band(curve, np.array([0.1]))


class TestAdditiveBand:
    def _bands(self):
        b1 = BandCurve(grid=np.array([0.0, 1.0]), center=np.array([1.0, 2.0]),
                       halfwidth=np.array([0.5, 0.5]))
        b2 = BandCurve(grid=np.array([0.0, 1.0]), center=np.array([-1.0, 0.0]),
                       halfwidth=np.array([0.25, 0.75]))
        return b1, b2

    def test_envelopes_are_exact_sums(self):
        b1, b2 = self._bands()
        band = AdditiveBand(axis_bands=(b1, b2), mu_n=10.0)
        lower, upper = band.envelopes_on_grid()
        want_lower = 10.0 + b1.lower[:, None] + b2.lower[None, :]
        want_upper = 10.0 + b1.upper[:, None] + b2.upper[None, :]
        assert np.array_equal(lower, want_lower)
        assert np.array_equal(upper, want_upper)

    def test_zero_halfwidths_collapse_to_fit(self):
        b1, b2 = self._bands()
        z1 = BandCurve(b1.grid, b1.center, np.zeros(2))
        z2 = BandCurve(b2.grid, b2.center, np.zeros(2))
        band = AdditiveBand(axis_bands=(z1, z2), mu_n=3.0)
        lower, upper = band.envelopes_on_grid()
        assert np.array_equal(lower, upper)

    def test_contains_additive_truth(self):
        b1, b2 = self._bands()
        band = AdditiveBand(axis_bands=(b1, b2), mu_n=10.0)
        # truth at the centers is contained; a shift in one component can
        # borrow slack from the other axis, so containment must match the
        # brute-force tensor-grid check in every case
        for shift in (0.0, 0.6, 0.9):
            truth = [b1.center + shift, b2.center]
            lower, upper = band.envelopes_on_grid()
            total = 10.0 + truth[0][:, None] + truth[1][None, :]
            brute = bool(np.all(total >= lower) and np.all(total <= upper))
            assert band.contains_additive(10.0, truth) is brute
        assert not band.contains_additive(10.0, [b1.center + 0.9, b2.center])

    def test_additive_band_validation(self):
        b1, b2 = self._bands()
        comp = ComponentCurve(axis=0, grid=np.array([0.0, 1.0]),
                              values=np.zeros(2))
        fit = AdditiveFit(components=(comp, comp), mu_n=0.0,
                          constant_source="single_bandwidth")
        band = additive_band(fit, (b1, b2), 5.0)
        assert band.mu_n == 5.0
        with pytest.raises(ValueError):
            additive_band(fit, (b1,), 5.0)
        uneven = BandwidthPlan(h_axes=np.array([0.1, 0.2]), ell=0.4,
                               h_single=0.1, n=100)
        with pytest.raises(ValueError, match="equal"):
            additive_band(fit, (b1, b2), 5.0, plan=uneven)


class _UniformDesign:
    """Uniform covariates on the unit square with flat response moments."""

    d = 2

    def __init__(self, second_moment):
        self._sm = second_moment
        self.domain = type("D", (), {"inner": np.array([[0.1, 0.9]] * 2)})()

    def second_moment(self, pts):
        pts = np.atleast_2d(pts)
        return np.full(pts.shape[0], self._sm)

    def f_axis(self, axis, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def f_joint(self, pts):
        return np.ones(np.atleast_2d(pts).shape[0])


class TestSigmaOracle:
    def test_zero_second_moment_gives_zero_target(self):
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        oracle = sigma_oracle(_UniformDesign(0.0), q, epanechnikov())
        assert oracle.sigma_l == 0.0
        assert np.max(np.abs(oracle.phi)) < 1e-12

    def test_uniform_design_closed_form(self):
        v = 0.7
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        oracle = sigma_oracle(_UniformDesign(v), q, epanechnikov())
        assert oracle.sigma_l == pytest.approx(math.sqrt(v * 0.6), abs=1e-8)
        assert np.allclose(oracle.sigma_fun, math.sqrt(v), atol=1e-8)

    def test_integrators_agree_on_uniform_design(self):
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        a = sigma_oracle(_UniformDesign(0.4), q, epanechnikov())
        b = sigma_oracle(_UniformDesign(0.4), q, epanechnikov(),
                         integrator="halton")
        assert a.sigma_l == pytest.approx(b.sigma_l, rel=1e-3)

    def test_unknown_integrator_rejected(self):
        q = bump_integration_density(((0.15, 0.85), (0.15, 0.85)), k=2)
        with pytest.raises(ValueError, match="integrator"):
            sigma_oracle(_UniformDesign(0.4), q, epanechnikov(),
                         integrator="riemann")


class TestTheoremStatistic:
    def test_identical_curves_give_zero(self):
        vals = np.array([0.1, -0.2, 0.3])
        stat = theorem_statistic(vals, vals, 0.1, 1000)
        assert stat.t_plus == 0.0
        assert stat.t_minus == 0.0

    def test_common_shift_invariance(self):
        fit = np.array([0.1, 0.5, -0.2])
        true = np.array([0.0, 0.4, -0.1])
        a = theorem_statistic(fit, true, 0.1, 1000)
        b = theorem_statistic(fit + 3.0, true + 3.0, 0.1, 1000)
        assert a.t_plus == pytest.approx(b.t_plus, abs=1e-12)
        assert a.t_minus == pytest.approx(b.t_minus, abs=1e-12)

    def test_offset_moves_positive_side_by_scaled_delta(self):
        fit = np.array([0.1, 0.5, -0.2])
        true = np.zeros(3)
        delta = 0.25
        a = theorem_statistic(fit, true, 0.1, 1000)
        b = theorem_statistic(fit + delta, true, 0.1, 1000)
        scale = math.sqrt(1000 * 0.1 / (2.0 * abs(math.log(0.1))))
        assert b.t_plus - a.t_plus == pytest.approx(delta * scale, rel=1e-12)

    def test_large_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            theorem_statistic(np.zeros(3), np.zeros(3), 1.0, 1000)
