"""Seeded dispersion campaigns: statistics, determinism, CSV export."""

import math
import statistics

import numpy as np
import pytest

from parafoil_scp.control_sim import LandingRecord
from parafoil_scp.montecarlo import (
    CSV_HEADER,
    CampaignConfig,
    RunResult,
    RunningStats,
    batch_stats,
    build_run,
    from_csv,
    run_campaign,
    run_one,
    stats_trace_csv,
    summarize,
    to_csv,
)


def tiny_config(**overrides):
    """A campaign small enough to plan and fly in well under a second/run."""
    base = dict(
        runs=3,
        base_seed=7,
        ring_radius=(150.0, 250.0),
        altitude_band=(300.0, 400.0),
        n_nodes=12,
        wind_grid_spacing=10.0,
    )
    base.update(overrides)
    return CampaignConfig(**base)


def result_row(run, miss, heading=0.1, status="landed", replans=0):
    rec = LandingRecord(miss, heading, 100.0, replans, 0.0,
                        status if status in ("landed", "escaped", "timeout")
                        else "landed")
    return RunResult(run, 100 + run, rec, 5, 2, 12.5, status)


class TestRunningStats:
    def test_matches_batch_statistics(self):
        rng = np.random.default_rng(0)
        misses = rng.uniform(0.0, 50.0, size=40)
        headings = rng.uniform(0.0, math.pi, size=40)
        st = RunningStats()
        for m, h in zip(misses, headings):
            st = st.update(float(m), float(h))
        assert st.n == 40
        assert st.mean_miss == pytest.approx(statistics.fmean(misses), rel=1e-12)
        assert st.var_miss == pytest.approx(statistics.variance(misses), rel=1e-12)
        assert st.mean_heading_miss == pytest.approx(
            statistics.fmean(headings), rel=1e-12
        )
        assert st.var_heading_miss == pytest.approx(
            statistics.variance(headings), rel=1e-12
        )

    def test_snapshots_are_immutable_and_consistent(self):
        st0 = RunningStats()
        st1 = st0.update(4.0, 0.2)
        st2 = st1.update(6.0, 0.4)
        assert st0.n == 0 and st1.n == 1 and st2.n == 2
        assert st1.mean_miss == 4.0 and st1.var_miss == 0.0
        assert st2.mean_miss == pytest.approx(5.0)
        assert st2.var_miss == pytest.approx(2.0)

    def test_batch_stats_permutation_invariant(self):
        recs = [LandingRecord(m, 0.01 * m, 50.0, 0, 0.0) for m in
                (3.0, 9.0, 1.0, 4.5, 7.25)]
        a = batch_stats(recs)
        b = batch_stats(list(reversed(recs)))
        assert a.mean_miss == pytest.approx(b.mean_miss, rel=1e-14)
        assert a.var_miss == pytest.approx(b.var_miss, rel=1e-12)

    def test_empty_batch(self):
        st = batch_stats([])
        assert st.n == 0 and st.mean_miss == 0.0


class TestSummarize:
    def test_simple_values(self):
        results = [result_row(0, 1.0), result_row(1, 3.0)]
        out = summarize(results)
        assert out["runs"] == 2 and out["landed"] == 2 and out["failed"] == 0
        assert out["miss_m"]["mean"] == pytest.approx(2.0)
        assert out["miss_m"]["median"] == pytest.approx(2.0)
        assert out["miss_m"]["max"] == 3.0
        assert out["mean_iterations"] == pytest.approx(7.0)

    def test_identical_values_collapse(self):
        results = [result_row(i, 5.0) for i in range(4)]
        out = summarize(results)
        m = out["miss_m"]
        assert m["mean"] == m["median"] == m["p95"] == m["max"] == 5.0

    def test_failed_runs_counted_separately(self):
        results = [result_row(0, 2.0), result_row(1, math.inf, status="error")]
        out = summarize(results)
        assert out["landed"] == 1 and out["failed"] == 1
        assert out["miss_m"]["mean"] == pytest.approx(2.0)

    def test_empty_campaign_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestConfigValidation:
    def test_bad_parameters_rejected(self):
        with pytest.raises(ValueError):
            CampaignConfig(runs=0)
        with pytest.raises(ValueError):
            CampaignConfig(ring_radius=(500.0, 100.0))
        with pytest.raises(ValueError):
            CampaignConfig(ring_radius=(0.0, 100.0))
        with pytest.raises(ValueError):
            CampaignConfig(altitude_band=(-10.0, 100.0))


class TestBuildRun:
    def test_deterministic_and_within_bands(self):
        cfg = tiny_config()
        s1, t1, seed1 = build_run(cfg, 2)
        s2, t2, seed2 = build_run(cfg, 2)
        assert seed1 == seed2 == cfg.base_seed + 2
        np.testing.assert_array_equal(s1.wind.wx, s2.wind.wx)
        np.testing.assert_array_equal(s1.wind.wy, s2.wind.wy)
        assert t1.v_bias == t2.v_bias and t1.r_bias == t2.r_bias

        radius = math.hypot(*s1.bounds.x0_r)
        assert cfg.ring_radius[0] <= radius <= cfg.ring_radius[1]
        assert cfg.altitude_band[0] <= s1.profile.z0 <= cfg.altitude_band[1]
        assert abs(t1.v_bias) <= cfg.v_bias_max
        assert abs(t1.r_bias) <= cfg.r_bias_max

    def test_different_runs_differ(self):
        cfg = tiny_config()
        s1, _, _ = build_run(cfg, 0)
        s2, _, _ = build_run(cfg, 1)
        assert s1.profile.z0 != s2.profile.z0
        assert not np.array_equal(s1.bounds.x0_r, s2.bounds.x0_r)

    def test_no_gust_profile_when_dispersion_free(self):
        cfg = tiny_config(hf_gust_sigma=0.0, wind_error_sigma=0.0)
        _, truth, _ = build_run(cfg, 0)
        assert truth.gust_profile is None


def mask_timing(csv_text: str) -> str:
    """Blank the mean_iter_ms column (the only wall-clock-dependent field)."""
    lines = csv_text.strip().splitlines()
    out = [lines[0]]
    idx = CSV_HEADER.split(",").index("mean_iter_ms")
    for ln in lines[1:]:
        parts = ln.split(",")
        parts[idx] = "-"
        out.append(",".join(parts))
    return "\n".join(out)


class TestCampaign:
    def test_serial_campaign_lands_and_is_reproducible(self):
        cfg = tiny_config()
        res1, trace1 = run_campaign(cfg)
        res2, trace2 = run_campaign(cfg)
        assert len(res1) == cfg.runs and len(trace1) == cfg.runs
        assert all(r.status == "landed" for r in res1)
        assert mask_timing(to_csv(res1)) == mask_timing(to_csv(res2))
        assert stats_trace_csv(trace1) == stats_trace_csv(trace2)
        assert trace1[-1].n == cfg.runs

    def test_parallel_matches_serial(self):
        cfg = tiny_config(runs=2)
        serial, trace_s = run_campaign(cfg, n_jobs=1)
        parallel, trace_p = run_campaign(cfg, n_jobs=2)
        assert mask_timing(to_csv(serial)) == mask_timing(to_csv(parallel))
        assert stats_trace_csv(trace_s) == stats_trace_csv(trace_p)

    def test_run_one_matches_campaign_row(self):
        cfg = tiny_config(runs=2)
        results, _ = run_campaign(cfg)
        redo = run_one(cfg, 1)
        assert mask_timing(CSV_HEADER + "\n" + redo.csv_row()) == mask_timing(
            CSV_HEADER + "\n" + results[1].csv_row()
        )

    def test_trace_updates_only_on_landings(self):
        cfg = tiny_config()
        results, trace = run_campaign(cfg)
        n_seen = 0
        for res, snap in zip(results, trace):
            if res.status == "landed":
                n_seen += 1
            assert snap.n == n_seen


class TestCsv:
    def test_round_trip(self):
        results = [result_row(0, 1.25), result_row(1, 2.5, replans=1)]
        text = to_csv(results)
        rows = from_csv(text)
        assert len(rows) == 2
        assert rows[0]["run"] == 0 and rows[0]["seed"] == 100
        assert rows[0]["miss_m"] == 1.25
        assert rows[1]["replans"] == 1
        assert rows[1]["status"] == "landed"

    def test_header_enforced(self):
        with pytest.raises(ValueError):
            from_csv("wrong,header\n1,2\n")

    def test_float_fields_round_trip_exactly(self):
        miss = 1.0 / 3.0
        text = to_csv([result_row(0, miss)])
        assert from_csv(text)[0]["miss_m"] == miss
