"""Wind profile generation, interpolation and the exact path integral."""

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from parafoil_scp.atmosphere import AtmosphereModel, SpeedProfile, TimeAltitudeMap
from parafoil_scp.wind import (
    DrydenParams,
    WindProfile,
    default_grid,
    generate_profile,
    integrated_wind,
    steady_shear,
)


@pytest.fixture(scope="module")
def profile():
    return SpeedProfile(2000.0, 15.0, 5.0)


@pytest.fixture(scope="module")
def time_map(profile):
    return TimeAltitudeMap(profile, t0=0.0, z_f=0.0)


@pytest.fixture(scope="module")
def grid():
    return default_grid(0.0, 2000.0, 2.0)


class TestWindProfile:
    def test_zero_and_constant_constructors(self):
        zp = WindProfile.zero()
        assert zp.wind_at(123.0) == (0.0, 0.0)
        cp = WindProfile.constant(3.0, -1.5)
        assert cp.wind_at(999.0) == (3.0, -1.5)

    def test_node_values_and_midpoint_interpolation(self):
        wp = WindProfile(np.array([0.0, 100.0]), np.array([1.0, 3.0]),
                         np.array([0.0, -2.0]))
        assert wp.wind_at(0.0) == (1.0, 0.0)
        assert wp.wind_at(100.0) == (3.0, -2.0)
        assert wp.wind_at(50.0) == (2.0, -1.0)

    def test_out_of_range_clamps_with_warning(self):
        wp = WindProfile(np.array([0.0, 100.0]), np.array([1.0, 3.0]),
                         np.array([0.0, -2.0]))
        with pytest.warns(UserWarning):
            assert wp.wind_at(200.0) == (3.0, -2.0)
        with pytest.warns(UserWarning):
            assert wp.wind_at(-50.0) == (1.0, 0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            WindProfile(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2))
        with pytest.raises(ValueError):
            WindProfile(np.array([0.0, 1.0]), np.zeros(3), np.zeros(2))
        with pytest.raises(ValueError):
            WindProfile(np.array([0.0, 1.0]), np.array([0.0, math.nan]), np.zeros(2))

    def test_csv_round_trip_bitwise(self, profile, grid):
        params = DrydenParams(w_ref=4.0, seed_x=5, seed_y=6)
        wp = generate_profile(params, profile, grid)
        back = WindProfile.from_csv(wp.to_csv())
        assert np.array_equal(back.grid, wp.grid)
        assert np.array_equal(back.wx, wp.wx)
        assert np.array_equal(back.wy, wp.wy)

    def test_csv_header_enforced(self):
        with pytest.raises(ValueError):
            WindProfile.from_csv("a,b,c\n0,0,0\n")


class TestGeneration:
    def test_zero_gusts_reduce_to_pure_shear(self, profile, grid):
        params = DrydenParams(w_ref=5.0, sigma_LF=0.0, sigma_HF=0.0)
        wp = generate_profile(params, profile, grid)
        expected = steady_shear(params, grid)
        assert np.allclose(wp.wx, expected, rtol=0.0, atol=0.0)
        assert np.array_equal(wp.wy, np.zeros_like(grid))

    def test_shear_reference_value(self):
        params = DrydenParams(w_ref=5.0, z_ref=10.0, shear_exponent=0.14)
        assert steady_shear(params, 10.0) == 5.0
        assert float(steady_shear(params, 160.0)) == pytest.approx(
            5.0 * 16.0**0.14, rel=1e-15
        )

    def test_shear_heading_rotation(self, profile, grid):
        theta = 0.7
        params = DrydenParams(w_ref=5.0, sigma_LF=0.0, sigma_HF=0.0,
                              heading_rad=theta)
        wp = generate_profile(params, profile, grid)
        mag = steady_shear(params, grid)
        assert np.allclose(wp.wx, mag * math.cos(theta), atol=1e-15)
        assert np.allclose(wp.wy, mag * math.sin(theta), atol=1e-15)

    def test_deterministic_for_fixed_seeds(self, profile, grid):
        params = DrydenParams(seed_x=42, seed_y=43)
        a = generate_profile(params, profile, grid)
        b = generate_profile(params, profile, grid)
        assert np.array_equal(a.wx, b.wx)
        assert np.array_equal(a.wy, b.wy)

    def test_independent_seeds_differ(self, profile, grid):
        a = generate_profile(DrydenParams(seed_x=1, seed_y=2), profile, grid)
        b = generate_profile(DrydenParams(seed_x=3, seed_y=4), profile, grid)
        assert not np.array_equal(a.wx, b.wx)

    def test_bands_superpose(self, profile, grid):
        """Generating LF and HF bands separately (same seeds) superposes to
        the full profile, because noise draws are consumed unconditionally."""
        kw = dict(w_ref=3.0, seed_x=9, seed_y=10)
        full = generate_profile(DrydenParams(sigma_LF=2.0, sigma_HF=0.5, **kw),
                                profile, grid)
        lf = generate_profile(DrydenParams(sigma_LF=2.0, sigma_HF=0.0, **kw),
                              profile, grid)
        hf = generate_profile(DrydenParams(sigma_LF=0.0, sigma_HF=0.5, **kw),
                              profile, grid)
        shear = generate_profile(DrydenParams(sigma_LF=0.0, sigma_HF=0.0, **kw),
                                 profile, grid)
        assert np.allclose(full.wx, lf.wx + hf.wx - shear.wx, atol=1e-12)
        assert np.allclose(full.wy, lf.wy + hf.wy - shear.wy, atol=1e-12)

    def test_gust_amplitude_scales_linearly(self, profile, grid):
        kw = dict(w_ref=0.0, seed_x=21, seed_y=22, sigma_HF=0.0)
        g1 = generate_profile(DrydenParams(sigma_LF=1.0, **kw), profile, grid)
        g2 = generate_profile(DrydenParams(sigma_LF=2.0, **kw), profile, grid)
        assert np.allclose(g2.wx, 2.0 * g1.wx, rtol=1e-12, atol=1e-12)

    def test_gust_ensemble_mean_is_zero(self, profile):
        """Monte-Carlo oracle: the stationary gust mean vanishes.

        1000 independent seeds, checked at a few altitudes against the
        3-sigma/sqrt(N) band of the stationary intensity.
        """
        sigma = 2.0
        grid = default_grid(0.0, 2000.0, 50.0)
        n = 1000
        idx = [5, 20, 35]
        samples = np.empty((n, len(idx)))
        for i in range(n):
            wp = generate_profile(
                DrydenParams(w_ref=0.0, sigma_LF=sigma, sigma_HF=0.0,
                             seed_x=10_000 + i, seed_y=90_000 + i),
                profile, grid,
            )
            samples[i] = wp.wx[idx]
        band = 3.0 * sigma / math.sqrt(n)
        assert np.all(np.abs(samples.mean(axis=0)) <= band)

    def test_gust_ensemble_std_matches_intensity(self, profile):
        sigma = 2.0
        grid = default_grid(0.0, 2000.0, 50.0)
        n = 1000
        samples = np.empty(n)
        for i in range(n):
            wp = generate_profile(
                DrydenParams(w_ref=0.0, sigma_LF=sigma, sigma_HF=0.0,
                             seed_x=i, seed_y=50_000 + i),
                profile, grid,
            )
            samples[i] = wp.wx[20]
        # Sample std of N=1000 draws: sigma/sqrt(2N) ~ 0.045; allow 4x.
        assert abs(samples.std(ddof=1) - sigma) <= 4.0 * sigma / math.sqrt(2 * n)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            DrydenParams(sigma_LF=-0.1)
        with pytest.raises(ValueError):
            DrydenParams(L_HF=0.0)
        with pytest.raises(ValueError):
            DrydenParams(z_ref=0.0)

    def test_default_grid_covers_range(self):
        g = default_grid(0.0, 2000.0, 2.0)
        assert g[0] == 0.0 and g[-1] == 2000.0
        assert g.size == 1001


class TestIntegratedWind:
    def test_zero_wind_integrates_to_zero(self, time_map):
        res = integrated_wind(WindProfile.zero(), time_map, 10.0, 50.0)
        assert np.array_equal(res, np.zeros(2))

    def test_empty_interval(self, time_map, profile, grid):
        wp = generate_profile(DrydenParams(), profile, grid)
        assert np.array_equal(integrated_wind(wp, time_map, 30.0, 30.0),
                              np.zeros(2))

    def test_constant_wind_is_wind_times_duration(self, time_map):
        wp = WindProfile.constant(2.5, -1.0)
        res = integrated_wind(wp, time_map, 12.0, 57.0)
        assert res[0] == pytest.approx(2.5 * 45.0, rel=1e-12)
        assert res[1] == pytest.approx(-1.0 * 45.0, rel=1e-12)

    def test_wind_linear_in_time_closed_form(self):
        """w(z(t)) = a + b t integrates to a dt + b (t_b^2 - t_a^2)/2.

        Uses the uniform atmosphere, where time is linear in altitude, so the
        tabulated profile is linear-in-time exactly (no interpolation error).
        """
        profile = SpeedProfile(2000.0, 15.0, 5.0, AtmosphereModel(c_rho=0.0))
        tm = TimeAltitudeMap(profile, t0=0.0, z_f=0.0)
        a, b = 1.5, 0.01
        grid = default_grid(0.0, 2000.0, 2.0)
        ts = np.array([tm.time_of_altitude(z) for z in grid])
        wp = WindProfile(grid, a + b * ts, np.zeros_like(grid))
        t_a, t_b = 40.0, 300.0
        res = integrated_wind(wp, tm, t_a, t_b)
        expected = a * (t_b - t_a) + 0.5 * b * (t_b**2 - t_a**2)
        assert res[0] == pytest.approx(expected, rel=1e-12)
        assert res[1] == 0.0

    def test_additive_over_adjacent_intervals(self, time_map, profile, grid):
        wp = generate_profile(DrydenParams(w_ref=4.0, seed_x=31, seed_y=32),
                              profile, grid)
        rng = np.random.default_rng(11)
        tf = time_map.final_time
        for _ in range(20):
            t_a, t_m, t_b = np.sort(rng.uniform(0.0, tf, size=3))
            whole = integrated_wind(wp, time_map, t_a, t_b)
            split = integrated_wind(wp, time_map, t_a, t_m) + integrated_wind(
                wp, time_map, t_m, t_b
            )
            assert np.linalg.norm(whole - split) <= 1e-9 * (
                1.0 + np.linalg.norm(whole)
            )

    def test_matches_refined_quadrature(self, time_map, profile, grid):
        wp = generate_profile(DrydenParams(w_ref=4.0, seed_x=33, seed_y=34),
                              profile, grid)
        rng = np.random.default_rng(5)
        tf = time_map.final_time
        for _ in range(10):
            t_a, t_b = np.sort(rng.uniform(0.0, tf, size=2))
            coarse = integrated_wind(wp, time_map, t_a, t_b)
            fine = integrated_wind(wp, time_map, t_a, t_b,
                                   panels_per_segment=80)
            assert np.linalg.norm(coarse - fine) <= 1e-6 * (
                1.0 + np.linalg.norm(fine)
            )

    def test_matches_time_domain_quadrature(self, time_map, profile, grid):
        """Independent oracle: integrate w(z(t)) directly over time."""
        wp = generate_profile(DrydenParams(w_ref=4.0, seed_x=35, seed_y=36),
                              profile, grid)
        t_a, t_b = 100.0, 180.0
        res = integrated_wind(wp, time_map, t_a, t_b)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # quad subdivision warnings
            ox, _ = quad(
                lambda t: wp.wind_at(time_map.altitude_of_time(t))[0],
                t_a, t_b, limit=400,
            )
            oy, _ = quad(
                lambda t: wp.wind_at(time_map.altitude_of_time(t))[1],
                t_a, t_b, limit=400,
            )
        assert res[0] == pytest.approx(ox, rel=1e-6, abs=1e-6)
        assert res[1] == pytest.approx(oy, rel=1e-6, abs=1e-6)

    def test_rejects_reversed_or_out_of_range_interval(self, time_map):
        wp = WindProfile.zero()
        with pytest.raises(ValueError):
            integrated_wind(wp, time_map, 50.0, 10.0)
        with pytest.raises(ValueError):
            integrated_wind(wp, time_map, -5.0, 10.0)
        with pytest.raises(ValueError):
            integrated_wind(wp, time_map, 0.0, time_map.final_time + 5.0)
