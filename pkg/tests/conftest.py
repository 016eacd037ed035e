"""Shared fixtures: nominal and small planning scenarios, solved once."""

from __future__ import annotations

import numpy as np
import pytest

from parafoil_scp.atmosphere import AtmosphereModel, SpeedProfile, TimeAltitudeMap
from parafoil_scp.planner import Scenario, plan
from parafoil_scp.transcription import BoundaryData, ScpWeights
from parafoil_scp.wind import DrydenParams, default_grid, generate_profile


def make_scenario(
    z0=2000.0,
    v0=15.0,
    r0=5.0,
    x0=(900.0, 700.0),
    psi0=2.0,
    xf=(0.0, 0.0),
    psi_f=0.0,
    psi_dot_max=0.2,
    n_nodes=40,
    w_ref=3.0,
    sigma_lf=2.0,
    sigma_hf=0.5,
    seed_x=11,
    seed_y=12,
    grid_spacing=2.0,
    atmosphere=None,
    z_f=0.0,
) -> Scenario:
    atm = atmosphere if atmosphere is not None else AtmosphereModel()
    profile = SpeedProfile(z0, v0, r0, atm)
    time_map = TimeAltitudeMap(profile, t0=0.0, z_f=z_f)
    grid = default_grid(z_f, z0, grid_spacing)
    wind = generate_profile(
        DrydenParams(
            w_ref=w_ref,
            sigma_LF=sigma_lf,
            sigma_HF=sigma_hf,
            seed_x=seed_x,
            seed_y=seed_y,
        ),
        profile,
        grid,
    )
    bounds = BoundaryData.from_headings(
        np.asarray(x0), psi0, np.asarray(xf), psi_f, profile, z_f, psi_dot_max
    )
    weights = ScpWeights.defaults_for(profile, z_f)
    return Scenario(profile, time_map, wind, bounds, weights, n_nodes)


def make_small_scenario(**overrides) -> Scenario:
    """Fast variant for unit tests: low release altitude, coarse mesh."""
    base = dict(
        z0=500.0,
        x0=(250.0, 180.0),
        psi0=1.0,
        n_nodes=16,
        w_ref=2.0,
        grid_spacing=5.0,
    )
    base.update(overrides)
    return make_scenario(**base)


@pytest.fixture(scope="session")
def nominal_scenario() -> Scenario:
    return make_scenario()


@pytest.fixture(scope="session")
def nominal_plan(nominal_scenario):
    """(reference, diagnostics, iterates) of the nominal scenario, solved once."""
    iterates: list = []
    reference, diag = plan(nominal_scenario, keep_iterates=iterates)
    return reference, diag, iterates


@pytest.fixture(scope="session")
def small_scenario() -> Scenario:
    return make_small_scenario()


@pytest.fixture(scope="session")
def small_plan(small_scenario):
    iterates: list = []
    reference, diag = plan(small_scenario, keep_iterates=iterates)
    return reference, diag, iterates
