"""Seeded dispersion campaigns over the closed-loop landing simulation.

Each run draws an initial condition (uniform ring around the target,
uniform heading, uniform altitude band), a wind realization known to the
planner, an extra high-frequency gust realization unknown to it, and
multiplicative speed dispersions, then plans and flies the descent.  Run i
uses seed base_seed + i, so runs are independent and the campaign is
reproducible bit for bit.
"""

from __future__ import annotations

import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .atmosphere import AtmosphereModel, SpeedProfile, TimeAltitudeMap
from .control_sim import ControllerGains, LandingRecord, TruthModelParams, fly
from .planner import Scenario, plan
from .transcription import BoundaryData, ScpWeights
from .wind import DrydenParams, default_grid, generate_profile

CSV_HEADER = "run,seed,miss_m,miss_heading_rad,iters_p1,iters_p2,mean_iter_ms,replans,status"


@dataclass(frozen=True)
class CampaignConfig:
    """Design of one Monte-Carlo campaign."""

    runs: int = 200
    base_seed: int = 0
    # Initial-condition sampler.
    ring_radius: tuple = (500.0, 2000.0)  # m, annulus around the target
    altitude_band: tuple = (1000.0, 3000.0)  # m
    # Nominal vehicle and problem.
    v0: float = 15.0
    r0: float = 5.0
    psi_dot_max: float = 0.2
    n_nodes: int = 40
    z_f: float = 0.0
    target: tuple = (0.0, 0.0)
    psi_f: float = 0.0
    atmosphere: AtmosphereModel = field(default_factory=AtmosphereModel)
    # Wind known to the planner (seeds are overridden per run).
    wind: DrydenParams = field(default_factory=lambda: DrydenParams(w_ref=3.0))
    wind_grid_spacing: float = 2.0  # m
    # Extra gust band unknown to the planner.
    hf_gust_sigma: float = 0.5
    hf_gust_length: float = 60.0
    # Low-frequency wind-knowledge error, also unknown to the planner; this
    # is what makes replanning earn its keep.  Off by default: the stock
    # campaign models a well-characterized wind column, and large knowledge
    # errors put a heavy tail on the miss distribution.
    wind_error_sigma: float = 0.0
    wind_error_length: float = 600.0
    # Truth dispersions (uniform in +-max) and plant imperfections.
    v_bias_max: float = 0.05
    r_bias_max: float = 0.05
    actuator_tau: float = 0.5
    turn_rate_limit: float = 0.2
    # Control and replanning.
    gains: ControllerGains = field(default_factory=ControllerGains)
    replan_threshold: float = 30.0
    weight_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0.0 < self.ring_radius[0] <= self.ring_radius[1]:
            raise ValueError("ring_radius must be a nonempty positive range")
        if not self.z_f < self.altitude_band[0] <= self.altitude_band[1]:
            raise ValueError("altitude_band must be a nonempty range above z_f")
        self.atmosphere.density(self.altitude_band[1])  # validates the band


@dataclass(frozen=True)
class RunningStats:
    """Welford running mean/variance of miss distance and heading miss.

    Variances are sample variances (n-1 denominator); update returns a new
    snapshot so a trace of these is immutable.
    """

    n: int = 0
    mean_miss: float = 0.0
    var_miss: float = 0.0
    mean_heading_miss: float = 0.0
    var_heading_miss: float = 0.0

    def update(self, miss: float, heading_miss: float) -> "RunningStats":
        n = self.n + 1
        d1 = miss - self.mean_miss
        mean_m = self.mean_miss + d1 / n
        m2_m = self.var_miss * max(self.n - 1, 0) + d1 * (miss - mean_m)
        d2 = heading_miss - self.mean_heading_miss
        mean_h = self.mean_heading_miss + d2 / n
        m2_h = self.var_heading_miss * max(self.n - 1, 0) + d2 * (heading_miss - mean_h)
        denom = max(n - 1, 1)
        return RunningStats(n, mean_m, m2_m / denom, mean_h, m2_h / denom)


@dataclass(frozen=True)
class RunResult:
    """One campaign row: landing record plus planner diagnostics."""

    run: int
    seed: int
    record: LandingRecord
    iters_p1: int
    iters_p2: int
    mean_iter_ms: float
    status: str  # record status, or "error" if the run raised

    def csv_row(self) -> str:
        r = self.record
        return (
            f"{self.run},{self.seed},{r.miss_distance!r},{r.miss_heading!r},"
            f"{self.iters_p1},{self.iters_p2},{self.mean_iter_ms!r},"
            f"{r.replans},{self.status}"
        )


def build_run(config: CampaignConfig, i: int):
    """Deterministically construct (scenario, truth, seed) for run i."""
    seed = config.base_seed + i
    rng = np.random.default_rng(seed)
    radius = rng.uniform(*config.ring_radius)
    angle = rng.uniform(-math.pi, math.pi)
    x0 = (
        config.target[0] + radius * math.cos(angle),
        config.target[1] + radius * math.sin(angle),
    )
    psi0 = rng.uniform(-math.pi, math.pi)
    z0 = rng.uniform(*config.altitude_band)
    v_bias = rng.uniform(-config.v_bias_max, config.v_bias_max)
    r_bias = rng.uniform(-config.r_bias_max, config.r_bias_max)
    wind_sx, wind_sy, gust_sx, gust_sy = (int(s) for s in rng.integers(2**31, size=4))

    profile = SpeedProfile(z0, config.v0, config.r0, config.atmosphere)
    time_map = TimeAltitudeMap(profile, t0=0.0, z_f=config.z_f)
    grid = default_grid(config.z_f, z0, config.wind_grid_spacing)
    wind_profile = generate_profile(
        replace(config.wind, seed_x=wind_sx, seed_y=wind_sy), profile, grid
    )
    gust_params = DrydenParams(
        w_ref=0.0,
        sigma_LF=config.wind_error_sigma,
        L_LF=config.wind_error_length,
        sigma_HF=config.hf_gust_sigma,
        L_HF=config.hf_gust_length,
        seed_x=gust_sx,
        seed_y=gust_sy,
    )
    gust_profile = (
        generate_profile(gust_params, profile, grid)
        if config.hf_gust_sigma > 0.0 or config.wind_error_sigma > 0.0
        else None
    )
    bounds = BoundaryData.from_headings(
        np.asarray(x0), psi0, np.asarray(config.target), config.psi_f,
        profile, config.z_f, config.psi_dot_max,
    )
    weights = ScpWeights.defaults_for(profile, config.z_f, **config.weight_overrides)
    scenario = Scenario(profile, time_map, wind_profile, bounds, weights,
                        config.n_nodes)
    truth = TruthModelParams(
        v_bias=v_bias,
        r_bias=r_bias,
        actuator_tau=config.actuator_tau,
        turn_rate_limit=config.turn_rate_limit,
        gust_profile=gust_profile,
    )
    return scenario, truth, seed


def run_one(config: CampaignConfig, i: int) -> RunResult:
    """Plan and fly run i; failures are recorded, never raised."""
    scenario, truth, seed = build_run(config, i)
    try:
        reference, diag = plan(scenario)
        rec, _ = fly(
            scenario,
            config.gains,
            truth,
            replan_threshold=config.replan_threshold,
            reference=reference,
        )
        status = rec.status if not diag.solver_failure else "solver_failure"
        mean_ms = (
            1e3 * statistics.fmean(diag.per_iteration_time)
            if diag.per_iteration_time
            else math.nan
        )
        return RunResult(i, seed, rec, diag.iterations_phase1,
                         diag.iterations_phase2, mean_ms, status)
    except Exception:
        failed = LandingRecord(math.inf, math.nan, math.nan, 0, 0.0, "escaped")
        return RunResult(i, seed, failed, 0, 0, math.nan, "error")


def run_campaign(
    config: CampaignConfig, n_jobs: int = 1
) -> tuple[list, list]:
    """Execute the campaign; returns (results, running-stats trace).

    The stats trace has one snapshot per run, updated only by runs that
    landed (failed runs keep the previous snapshot), always reduced in run
    order so parallel execution matches serial execution exactly.
    """
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run_one, [config] * config.runs,
                                    range(config.runs)))
    else:
        results = [run_one(config, i) for i in range(config.runs)]

    stats = RunningStats()
    trace = []
    for res in results:
        if res.status == "landed":
            stats = stats.update(res.record.miss_distance, res.record.miss_heading)
        trace.append(stats)
    return results, trace


def batch_stats(records: list) -> RunningStats:
    """Order-insensitive batch statistics over landed records."""
    misses = [r.miss_distance for r in records]
    headings = [r.miss_heading for r in records]
    n = len(misses)
    if n == 0:
        return RunningStats()
    var_m = statistics.variance(misses) if n > 1 else 0.0
    var_h = statistics.variance(headings) if n > 1 else 0.0
    return RunningStats(n, statistics.fmean(misses), var_m,
                        statistics.fmean(headings), var_h)


def summarize(results: list) -> dict:
    """Summary table over campaign results; raises on empty input."""
    if not results:
        raise ValueError("cannot summarize an empty campaign")
    landed = [r for r in results if r.status == "landed"]
    out = {
        "runs": len(results),
        "landed": len(landed),
        "failed": len(results) - len(landed),
    }
    if landed:
        misses = sorted(r.record.miss_distance for r in landed)
        headings = sorted(r.record.miss_heading for r in landed)

        def pct(vals, q):
            k = min(int(math.ceil(q * len(vals))) - 1, len(vals) - 1)
            return vals[max(k, 0)]

        out["miss_m"] = {
            "mean": statistics.fmean(misses),
            "median": statistics.median(misses),
            "p95": pct(misses, 0.95),
            "max": misses[-1],
        }
        out["miss_heading_rad"] = {
            "mean": statistics.fmean(headings),
            "median": statistics.median(headings),
            "p95": pct(headings, 0.95),
            "max": headings[-1],
        }
        out["mean_iterations"] = statistics.fmean(
            r.iters_p1 + r.iters_p2 for r in landed
        )
        out["mean_iter_ms"] = statistics.fmean(
            r.mean_iter_ms for r in landed if math.isfinite(r.mean_iter_ms)
        )
        out["mean_replans"] = statistics.fmean(r.record.replans for r in landed)
    return out


# -- campaign CSV -----------------------------------------------------------


def to_csv(results: list) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for res in results:
        buf.write(res.csv_row() + "\n")
    return buf.getvalue()


def from_csv(text: str) -> list:
    """Parse campaign rows back into dicts (reader for the CSV export)."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    fields = CSV_HEADER.split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        row = dict(zip(fields, parts))
        for key in ("run", "seed", "iters_p1", "iters_p2", "replans"):
            row[key] = int(row[key])
        for key in ("miss_m", "miss_heading_rad", "mean_iter_ms"):
            row[key] = float(row[key])
        rows.append(row)
    return rows


def stats_trace_csv(trace: list) -> str:
    """Running-stats trace as CSV, one snapshot per run."""
    buf = io.StringIO()
    buf.write("run,n,mean_miss_m,var_miss_m2,mean_heading_rad,var_heading_rad2\n")
    for i, st in enumerate(trace):
        buf.write(
            f"{i},{st.n},{st.mean_miss!r},{st.var_miss!r},"
            f"{st.mean_heading_miss!r},{st.var_heading_miss!r}\n"
        )
    return buf.getvalue()
