"""Versioned scenario configuration: one JSON document drives every command.

The schema aggregates the atmosphere constants, speed profile, boundary
conditions, solver weights, wind model, truth-plant dispersions, controller
gains and the Monte-Carlo campaign block.  Unknown keys are rejected and
all quantities are SI.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .atmosphere import AtmosphereModel, SpeedProfile, TimeAltitudeMap
from .control_sim import ControllerGains, TruthModelParams
from .montecarlo import CampaignConfig
from .planner import Scenario
from .transcription import BoundaryData, ScpWeights
from .wind import DrydenParams, WindProfile, default_grid, generate_profile

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AtmosphereSection(_Strict):
    c_h: float = 1.225
    c_rho: float = 2.256e-5
    c_e: float = 4.2559


class SpeedSection(_Strict):
    v0: float = 15.0  # horizontal airspeed at z0, m/s
    r0: float = 5.0  # sink rate at z0, m/s
    z0: float = 2000.0  # release altitude, m


class BoundarySection(_Strict):
    x0: tuple[float, float] = (900.0, 700.0)
    psi0: float = 2.0
    xf: tuple[float, float] = (0.0, 0.0)
    psi_f: float = 0.0
    z_f: float = 0.0


class WeightsSection(_Strict):
    alpha1: float = 1.0e4
    alpha2: float = 1.0e2
    alpha5: float = 1.0e3
    eps_h: float | None = None  # None: 5% of landing speed
    eps_u: float | None = None  # None: 30% of release speed
    conv_tol: float = 1.0e-3
    max_iter: int = 50


class WindSection(_Strict):
    w_ref: float = 3.0
    z_ref: float = 10.0
    shear_exponent: float = 0.14
    sigma_LF: float = 2.0
    L_LF: float = 600.0
    sigma_HF: float = 0.5
    L_HF: float = 60.0
    seed_x: int = 1
    seed_y: int = 2
    heading_rad: float = 0.0
    grid_spacing: float = 2.0


class TruthSection(_Strict):
    v_bias: float = 0.0
    r_bias: float = 0.0
    actuator_tau: float = 0.0
    turn_rate_limit: float = 0.2
    hf_gust_sigma: float = 0.0  # extra gust band unknown to the planner
    hf_gust_length: float = 60.0
    wind_error_sigma: float = 0.0  # LF wind-knowledge error (campaign only)
    wind_error_length: float = 600.0


class GainsSection(_Strict):
    k_cross: float = 0.05
    k_heading: float = 2.0
    k_long: float = 2.0
    turn_rate_limit: float = 0.2
    sink_delta_frac: float = 0.15


class CampaignSection(_Strict):
    runs: int = 200
    base_seed: int = 0
    ring_radius: tuple[float, float] = (500.0, 2000.0)
    altitude_band: tuple[float, float] = (1000.0, 3000.0)
    v_bias_max: float = 0.05
    r_bias_max: float = 0.05
    actuator_tau: float = 0.5
    replan_threshold: float = 30.0


class ScenarioConfig(_Strict):
    """Top-level, versioned configuration document."""

    schema_version: Literal[1] = SCHEMA_VERSION
    atmosphere: AtmosphereSection = Field(default_factory=AtmosphereSection)
    speed: SpeedSection = Field(default_factory=SpeedSection)
    boundary: BoundarySection = Field(default_factory=BoundarySection)
    psi_dot_max: float = 0.2
    n_nodes: int = 40
    weights: WeightsSection = Field(default_factory=WeightsSection)
    wind: WindSection = Field(default_factory=WindSection)
    truth: TruthSection = Field(default_factory=TruthSection)
    gains: GainsSection = Field(default_factory=GainsSection)
    campaign: CampaignSection = Field(default_factory=CampaignSection)

    @model_validator(mode="after")
    def _check_physics(self):
        if self.boundary.z_f >= self.speed.z0:
            raise ValueError("boundary.z_f must lie below speed.z0")
        if self.psi_dot_max <= 0.0:
            raise ValueError("psi_dot_max must be positive")
        if self.n_nodes < 3:
            raise ValueError("n_nodes must be at least 3")
        return self


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ScenarioConfig.model_validate_json(fh.read())


# -- builders ---------------------------------------------------------------


def build_atmosphere(cfg: ScenarioConfig) -> AtmosphereModel:
    a = cfg.atmosphere
    return AtmosphereModel(a.c_h, a.c_rho, a.c_e)


def build_profile(cfg: ScenarioConfig) -> SpeedProfile:
    return SpeedProfile(cfg.speed.z0, cfg.speed.v0, cfg.speed.r0,
                        build_atmosphere(cfg))


def build_wind_params(cfg: ScenarioConfig, seed: int | None = None) -> DrydenParams:
    w = cfg.wind
    seed_x, seed_y = w.seed_x, w.seed_y
    if seed is not None:
        seed_x, seed_y = 2 * seed, 2 * seed + 1
    return DrydenParams(
        w_ref=w.w_ref,
        z_ref=w.z_ref,
        shear_exponent=w.shear_exponent,
        sigma_LF=w.sigma_LF,
        L_LF=w.L_LF,
        sigma_HF=w.sigma_HF,
        L_HF=w.L_HF,
        seed_x=seed_x,
        seed_y=seed_y,
        heading_rad=w.heading_rad,
    )


def build_wind_profile(cfg: ScenarioConfig, seed: int | None = None) -> WindProfile:
    profile = build_profile(cfg)
    grid = default_grid(cfg.boundary.z_f, cfg.speed.z0, cfg.wind.grid_spacing)
    return generate_profile(build_wind_params(cfg, seed), profile, grid)


def build_weights(cfg: ScenarioConfig, profile: SpeedProfile) -> ScpWeights:
    w = cfg.weights
    eps_h = w.eps_h
    eps_u = w.eps_u
    if eps_h is None:
        eps_h = 0.05 * profile.horizontal_speed(cfg.boundary.z_f)
    if eps_u is None:
        eps_u = 0.3 * profile.horizontal_speed(profile.z0)
    return ScpWeights(w.alpha1, w.alpha2, w.alpha5, eps_h, eps_u,
                      w.conv_tol, w.max_iter)


def build_scenario(cfg: ScenarioConfig, seed: int | None = None) -> Scenario:
    profile = build_profile(cfg)
    time_map = TimeAltitudeMap(profile, t0=0.0, z_f=cfg.boundary.z_f)
    wind = build_wind_profile(cfg, seed)
    b = cfg.boundary
    bounds = BoundaryData.from_headings(
        np.asarray(b.x0), b.psi0, np.asarray(b.xf), b.psi_f,
        profile, b.z_f, cfg.psi_dot_max,
    )
    weights = build_weights(cfg, profile)
    return Scenario(profile, time_map, wind, bounds, weights, cfg.n_nodes)


def build_truth(cfg: ScenarioConfig, seed: int | None = None) -> TruthModelParams:
    t = cfg.truth
    gust = None
    if t.hf_gust_sigma > 0.0 or t.wind_error_sigma > 0.0:
        profile = build_profile(cfg)
        grid = default_grid(cfg.boundary.z_f, cfg.speed.z0, cfg.wind.grid_spacing)
        base = 0 if seed is None else seed
        gust_params = DrydenParams(
            w_ref=0.0,
            sigma_LF=t.wind_error_sigma,
            L_LF=t.wind_error_length,
            sigma_HF=t.hf_gust_sigma,
            L_HF=t.hf_gust_length,
            seed_x=2 * base + 10_001,
            seed_y=2 * base + 10_002,
        )
        gust = generate_profile(gust_params, profile, grid)
    return TruthModelParams(
        v_bias=t.v_bias,
        r_bias=t.r_bias,
        actuator_tau=t.actuator_tau,
        turn_rate_limit=t.turn_rate_limit,
        gust_profile=gust,
    )


def build_gains(cfg: ScenarioConfig) -> ControllerGains:
    g = cfg.gains
    return ControllerGains(g.k_cross, g.k_heading, g.k_long,
                           g.turn_rate_limit, g.sink_delta_frac)


def build_campaign(cfg: ScenarioConfig) -> CampaignConfig:
    c = cfg.campaign
    overrides = {}
    if cfg.weights.eps_h is not None:
        overrides["eps_h"] = cfg.weights.eps_h
    if cfg.weights.eps_u is not None:
        overrides["eps_u"] = cfg.weights.eps_u
    overrides.update(
        alpha1=cfg.weights.alpha1,
        alpha2=cfg.weights.alpha2,
        alpha5=cfg.weights.alpha5,
        conv_tol=cfg.weights.conv_tol,
        max_iter=cfg.weights.max_iter,
    )
    return CampaignConfig(
        runs=c.runs,
        base_seed=c.base_seed,
        ring_radius=tuple(c.ring_radius),
        altitude_band=tuple(c.altitude_band),
        v0=cfg.speed.v0,
        r0=cfg.speed.r0,
        psi_dot_max=cfg.psi_dot_max,
        n_nodes=cfg.n_nodes,
        z_f=cfg.boundary.z_f,
        target=tuple(cfg.boundary.xf),
        psi_f=cfg.boundary.psi_f,
        atmosphere=build_atmosphere(cfg),
        wind=build_wind_params(cfg),
        wind_grid_spacing=cfg.wind.grid_spacing,
        hf_gust_sigma=cfg.truth.hf_gust_sigma,
        hf_gust_length=cfg.truth.hf_gust_length,
        wind_error_sigma=cfg.truth.wind_error_sigma,
        wind_error_length=cfg.truth.wind_error_length,
        v_bias_max=c.v_bias_max,
        r_bias_max=c.r_bias_max,
        actuator_tau=c.actuator_tau,
        turn_rate_limit=cfg.truth.turn_rate_limit,
        gains=build_gains(cfg),
        replan_threshold=c.replan_threshold if c.replan_threshold > 0 else math.inf,
        weight_overrides=overrides,
    )
