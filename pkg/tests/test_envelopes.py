"""Spectral envelope normalization, evaluation, and the band limit."""

import math

import numpy as np
import pytest

import photonsql as pq
from conftest import trapz_norm


class TestNormalize:
    def test_gaussian_already_unit(self):
        env = pq.normalize(pq.GaussianEnvelope(1.0))
        assert env.kappa == 1.0
        assert env.amplitude == pytest.approx((1 / math.pi) ** 0.25)

    def test_dual_delta_equal_weights(self):
        env = pq.normalize(pq.DualDeltaEnvelope(1.0, weights=(1.0, 1.0)))
        assert env.weights[0] == pytest.approx(1 / math.sqrt(2))
        assert env.weights[1] == pytest.approx(1 / math.sqrt(2))

    def test_sampled_gaussian_unit_norm(self, sampled_gauss):
        env = pq.normalize(sampled_gauss)
        assert abs(trapz_norm(env) - 1.0) < 1e-9

    def test_direction_preserved(self, sampled_gauss):
        env = pq.normalize(sampled_gauss)
        ratio = env.values[300:900] / sampled_gauss.values[300:900]
        assert np.allclose(ratio, ratio[0])
        assert ratio[0].real > 0 and abs(ratio[0].imag) < 1e-15

    def test_zero_envelope_refused(self):
        dead = pq.SampledEnvelope(-1.0, 0.25, np.zeros(9, dtype=complex))
        with pytest.raises(pq.ZeroEnvelope):
            pq.normalize(dead)

    def test_sampled_needs_eight_points(self):
        with pytest.raises(ValueError):
            pq.SampledEnvelope(0.0, 0.1, np.ones(5, dtype=complex))


class TestEvaluation:
    def test_gaussian_peak_value(self, gauss1):
        assert pq.envelope_at(gauss1, 0.0) == pytest.approx(math.pi ** -0.25)

    def test_dual_delta_pointwise_refused(self):
        with pytest.raises(pq.DistributionalState):
            pq.envelope_at(pq.DualDeltaEnvelope(1.0), 0.5)

    def test_sampled_interpolation_and_support(self, sampled_gauss):
        env = pq.normalize(sampled_gauss)
        mid = pq.envelope_at(env, 0.005)  # between grid points
        lo = pq.envelope_at(env, 0.0)
        hi = pq.envelope_at(env, 0.01)
        assert mid == pytest.approx((lo + hi) / 2)
        assert pq.envelope_at(env, 9.0) == 0.0

    def test_spatial_transform_matches_quadrature(self, gauss1):
        k = np.linspace(-10, 10, 8001)
        g = math.pi ** -0.25 * np.exp(-k**2 / 2)
        for y, quad_coeff in [(0.3, 0.0), (1.1, 0.7), (-0.4, -0.2)]:
            direct = np.trapezoid(g * np.exp(1j * k * y - 1j * quad_coeff * k**2), k)
            got = pq.spatial_transform(gauss1, y, quad_coeff=quad_coeff)
            assert got == pytest.approx(direct, abs=1e-9)

    def test_transform_moments_gaussian(self, gauss1):
        mean, var = pq.transform_moments(gauss1)
        assert mean == 0.0
        assert var == pytest.approx(0.5)

    def test_transform_moments_sampled_matches_gaussian(self, sampled_gauss):
        env = pq.normalize(sampled_gauss)
        mean, var = pq.transform_moments(env, quad_coeff=0.8)
        _, var_exact = pq.transform_moments(pq.GaussianEnvelope(1.0), quad_coeff=0.8)
        assert mean == pytest.approx(0.0, abs=1e-9)
        assert var == pytest.approx(var_exact, rel=1e-6)

    def test_dual_delta_moments_diverge(self):
        with pytest.raises(pq.InfiniteMoment):
            pq.transform_moments(pq.DualDeltaEnvelope(1.0))

    def test_rms_kappa_recovers_gaussian(self, sampled_gauss):
        assert pq.rms_kappa(pq.GaussianEnvelope(2.5)) == 2.5
        assert pq.rms_kappa(pq.normalize(sampled_gauss)) == pytest.approx(1.0, rel=1e-6)


class TestBandLimit:
    def test_far_inside_band_passes(self):
        bl = pq.BandLimit(1.0)
        report = pq.band_limit_check(pq.GaussianEnvelope(bl.k_max / 8), bl)
        assert report.passed
        assert report.in_band_fraction == pytest.approx(1.0)

    def test_dual_delta_out_of_band(self):
        bl = pq.BandLimit(1.0)
        report = pq.band_limit_check(pq.DualDeltaEnvelope(1.5 * bl.k_max), bl)
        assert report.in_band_fraction == 0.0
        assert not report.passed

    def test_gaussian_fraction_is_erf(self):
        bl = pq.BandLimit(1.0)
        kappa = bl.k_max
        report = pq.band_limit_check(pq.GaussianEnvelope(kappa), bl)
        # independent quadrature of the spectral density over the band
        k = np.linspace(-bl.k_max, bl.k_max, 400001)
        dens = (math.pi * kappa**2) ** -0.5 * np.exp(-(k**2) / kappa**2)
        assert report.in_band_fraction == pytest.approx(np.trapezoid(dens, k), abs=1e-9)
        assert report.in_band_fraction == pytest.approx(math.erf(1.0), abs=1e-12)
        assert not report.passed

    def test_sampled_partial_cells(self, sampled_gauss):
        env = pq.normalize(sampled_gauss)
        bl = pq.BandLimit(2 * math.pi / 1.005)  # k_max = 1.005, between grid points
        report = pq.band_limit_check(env, bl)
        assert report.in_band_fraction == pytest.approx(math.erf(1.005), rel=1e-6)
